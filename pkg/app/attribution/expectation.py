from dataclasses import dataclass
from typing import FrozenSet, Iterable

import numpy as np

from app.errors import AttributionError, SchemaError
from app.model import LEAF, Tree, TreeEnsemble

MAX_BRUTE_FORCE_FEATURES = 20


@dataclass(frozen=True)
class CoalitionMask:
    """Set of feature indices that are known (present) in a coalition."""
    present: FrozenSet[int]
    size: int

    def __post_init__(self):
        object.__setattr__(self, "present", frozenset(int(i) for i in self.present))
        if any(i < 0 or i >= self.size for i in self.present):
            raise SchemaError(f"coalition members must lie in [0, {self.size})")

    @classmethod
    def empty(cls, size: int) -> "CoalitionMask":
        return cls(frozenset(), size)

    @classmethod
    def full(cls, size: int) -> "CoalitionMask":
        return cls(frozenset(range(size)), size)

    @classmethod
    def of(cls, members: Iterable[int], size: int) -> "CoalitionMask":
        return cls(frozenset(members), size)

    @classmethod
    def from_bits(cls, bits: int, size: int) -> "CoalitionMask":
        return cls(frozenset(i for i in range(size) if (bits >> i) & 1), size)

    def __contains__(self, feature: int) -> bool:
        return feature in self.present

    def __len__(self) -> int:
        return len(self.present)

    def with_feature(self, feature: int) -> "CoalitionMask":
        return CoalitionMask(self.present | {feature}, self.size)


def _tree_expvalue(tree: Tree, x, present: FrozenSet[int]) -> float:
    features, thresholds, left, right, cover, values = tree.lists

    def recurse(i: int) -> float:
        f = features[i]
        if f == LEAF:
            return values[i]
        if f in present:
            return recurse(left[i] if x[f] <= thresholds[i] else right[i])
        if cover[i] == 0:
            raise AttributionError(f"internal node {i} has zero cover")
        l, r = left[i], right[i]
        return (cover[l] * recurse(l) + cover[r] * recurse(r)) / cover[i]

    return recurse(0)


def expvalue(model: TreeEnsemble, x, S: CoalitionMask) -> float:
    """
    Path-dependent conditional expectation v(S): splits on features in S
    follow x, the others average their children weighted by cover.
    """
    model._check_dim(x)
    total = model.base_margin
    for tree in model.trees:
        total += _tree_expvalue(tree, x, S.present)
    return total


def coalition_matrix(n: int) -> np.ndarray:
    """Row m marks feature i present iff bit i of m is set."""
    codes = np.arange(2 ** n, dtype=np.int64)
    return ((codes[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(bool)


def coalition_values(model: TreeEnsemble, x) -> np.ndarray:
    """v(S) for all 2^n coalitions at once, indexed by the coalition's bit code."""
    model._check_dim(x)
    n = model.feature_count
    if n > MAX_BRUTE_FORCE_FEATURES:
        raise AttributionError(
            f"coalition enumeration supports at most {MAX_BRUTE_FORCE_FEATURES} features, got {n}")
    members = coalition_matrix(n)
    total = np.full(len(members), model.base_margin)
    for tree in model.trees:
        total += _tree_coalition_values(tree, x, members)
    return total


def _tree_coalition_values(tree: Tree, x, members: np.ndarray) -> np.ndarray:
    features, thresholds, left, right, cover, values = tree.lists
    rows = len(members)

    def recurse(i: int) -> np.ndarray:
        f = features[i]
        if f == LEAF:
            return np.full(rows, values[i])
        if cover[i] == 0:
            raise AttributionError(f"internal node {i} has zero cover")
        l, r = left[i], right[i]
        left_values, right_values = recurse(l), recurse(r)
        hot = left_values if x[f] <= thresholds[i] else right_values
        averaged = (cover[l] * left_values + cover[r] * right_values) / cover[i]
        return np.where(members[:, f], hot, averaged)

    return recurse(0)
