import numpy as np

from app.errors import AttributionError
from app.model import LEAF, Tree, TreeEnsemble
from app.state import AttributionVector
from .base import Explainer
from .expectation import CoalitionMask, expvalue


class _Path:
    """
    The unique features on the current root-to-node path, each with the
    fraction of cover that flows through when the feature is unknown (zero)
    or known (one), plus the permutation weights of every subset size.
    """
    __slots__ = ("feature", "zero", "one", "pweight")

    def __init__(self, feature, zero, one, pweight):
        self.feature = feature
        self.zero = zero
        self.one = one
        self.pweight = pweight

    def copy(self, depth: int) -> "_Path":
        return _Path(self.feature[:depth], self.zero[:depth], self.one[:depth], self.pweight[:depth])

    def extend(self, depth: int, zero_fraction: float, one_fraction: float, feature: int) -> None:
        self.feature.append(feature)
        self.zero.append(zero_fraction)
        self.one.append(one_fraction)
        self.pweight.append(1.0 if depth == 0 else 0.0)
        w = self.pweight
        for i in range(depth - 1, -1, -1):
            w[i + 1] += one_fraction * w[i] * (i + 1) / (depth + 1)
            w[i] = zero_fraction * w[i] * (depth - i) / (depth + 1)

    def unwind(self, depth: int, index: int) -> None:
        one, zero = self.one[index], self.zero[index]
        w = self.pweight
        next_one_portion = w[depth]
        for i in range(depth - 1, -1, -1):
            if one != 0:
                tmp = w[i]
                w[i] = next_one_portion * (depth + 1) / ((i + 1) * one)
                next_one_portion = tmp - w[i] * zero * (depth - i) / (depth + 1)
            else:
                w[i] = w[i] * (depth + 1) / (zero * (depth - i))
        for i in range(index, depth):
            self.feature[i] = self.feature[i + 1]
            self.zero[i] = self.zero[i + 1]
            self.one[i] = self.one[i + 1]
        del self.feature[depth], self.zero[depth], self.one[depth], self.pweight[depth]

    def unwound_sum(self, depth: int, index: int) -> float:
        """Total permutation weight of the path with element `index` removed."""
        one, zero = self.one[index], self.zero[index]
        w = self.pweight
        next_one_portion = w[depth]
        total = 0.0
        for i in range(depth - 1, -1, -1):
            if one != 0:
                tmp = next_one_portion * (depth + 1) / ((i + 1) * one)
                total += tmp
                next_one_portion = w[i] - tmp * zero * ((depth - i) / (depth + 1))
            elif zero != 0:
                total += (w[i] / zero) / ((depth - i) / (depth + 1))
        return total


def _tree_shap_into(tree: Tree, x, phi: np.ndarray) -> None:
    features, thresholds, left, right, cover, values = tree.lists

    def recurse(node, depth, parent, zero_fraction, one_fraction, feature):
        path = parent.copy(depth)
        path.extend(depth, zero_fraction, one_fraction, feature)
        split = features[node]
        if split == LEAF:
            value = values[node]
            for i in range(1, depth + 1):
                weight = path.unwound_sum(depth, i)
                phi[path.feature[i]] += weight * (path.one[i] - path.zero[i]) * value
            return

        l, r = left[node], right[node]
        hot, cold = (l, r) if x[split] <= thresholds[node] else (r, l)
        if cover[node] == 0:
            raise AttributionError(f"internal node {node} has zero cover")

        incoming_zero = incoming_one = 1.0
        # a feature seen higher up is folded into one path element
        for k in range(1, depth + 1):
            if path.feature[k] == split:
                incoming_zero, incoming_one = path.zero[k], path.one[k]
                path.unwind(depth, k)
                depth -= 1
                break

        hot_zero = cover[hot] / cover[node] * incoming_zero
        cold_zero = cover[cold] / cover[node] * incoming_zero
        # a branch no row reached and x does not take adds nothing
        if hot_zero != 0 or incoming_one != 0:
            recurse(hot, depth + 1, path, hot_zero, incoming_one, split)
        if cold_zero != 0:
            recurse(cold, depth + 1, path, cold_zero, 0.0, split)

    recurse(0, 0, _Path([], [], [], []), 1.0, 1.0, -1)


def tree_shap(model: TreeEnsemble, x, sample_id: str = "") -> AttributionVector:
    """
    Exact path-dependent Shapley values in margin units, polynomial in tree
    depth. The baseline is the expectation with no feature known.
    """
    model._check_dim(x)
    phi = np.zeros(model.feature_count)
    for tree in model.trees:
        _tree_shap_into(tree, x, phi)
    baseline = expvalue(model, x, CoalitionMask.empty(model.feature_count))
    return AttributionVector(phi=phi, baseline=baseline, sample_id=sample_id)


class TreeShapExplainer(Explainer):
    def explain(self, x, sample_id: str = "") -> AttributionVector:
        return tree_shap(self.model, x, sample_id)
