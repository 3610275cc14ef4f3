import numpy as np
from scipy.special import rel_entr

from app.errors import RefinementError

_MASS_TOLERANCE = 1e-12


def mutual_information(joint) -> float:
    """I(X;Y) in nats of a two-way probability table, with 0 log 0 = 0."""
    joint = np.asarray(joint, dtype=np.float64)
    if joint.ndim != 2:
        raise RefinementError("joint distribution must be a two-way table")
    if np.any(joint < 0):
        raise RefinementError("joint distribution has negative mass")
    if abs(joint.sum() - 1.0) > _MASS_TOLERANCE:
        raise RefinementError(f"joint distribution sums to {joint.sum()!r}, not 1")
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    return max(0.0, float(rel_entr(joint, np.outer(px, py)).sum()))


def coarsen_joint(joint, mapping) -> np.ndarray:
    """Joint of (g(X), Y) where g sends row i to row mapping[i]."""
    joint = np.asarray(joint, dtype=np.float64)
    mapping = np.asarray(mapping, dtype=np.int64)
    if mapping.shape != (joint.shape[0],) or np.any(mapping < 0):
        raise RefinementError("mapping must give a non-negative target for every row")
    out = np.zeros((int(mapping.max()) + 1, joint.shape[1]))
    np.add.at(out, mapping, joint)
    return out
