import numpy as np
from scipy.special import comb

from app.model import TreeEnsemble
from app.state import AttributionVector
from .base import Explainer
from .expectation import coalition_matrix, coalition_values


def shapley_weights(n: int) -> np.ndarray:
    """w[s] = s! (n - 1 - s)! / n! for coalitions of size s not holding the player."""
    weights = [1.0 / (n * comb(n - 1, s, exact=True)) for s in range(n)]
    return np.array(weights + [0.0])  # the grand coalition never lacks a player


def brute_force_shapley(model: TreeEnsemble, x, sample_id: str = "") -> AttributionVector:
    """
    Exact Shapley values by enumerating every coalition of features with the
    cover-weighted expectation as the value function. Exponential in the
    feature count, so it is only defined up to 20 features.
    """
    values = coalition_values(model, x)
    n = model.feature_count
    members = coalition_matrix(n)
    weights = shapley_weights(n)[members.sum(axis=1)]
    codes = np.arange(len(values))
    phi = np.zeros(n)
    for i in range(n):
        without = ~members[:, i]
        S = codes[without]
        phi[i] = float(np.sum(weights[without] * (values[S | (1 << i)] - values[S])))
    return AttributionVector(phi=phi, baseline=float(values[0]), sample_id=sample_id)


class BruteForceExplainer(Explainer):
    def explain(self, x, sample_id: str = "") -> AttributionVector:
        return brute_force_shapley(self.model, x, sample_id)
