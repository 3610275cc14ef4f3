import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Sequence, Set, Tuple, Union

import numpy as np
from scipy.special import expit

from app.errors import ModelFormatError, SchemaError
from app.state import PairedSample

LEAF = -1

_PROBA_FLOOR = np.finfo(np.float64).tiny
_PROBA_CEIL = float(np.nextafter(1.0, 0.0))
_COVER_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Tree:
    """
    One regression tree stored as parallel node arrays; node 0 is the root.
    Leaves carry `features == LEAF`. `cover` is the number of training rows
    that reached each node.
    """
    features: np.ndarray
    thresholds: np.ndarray
    left: np.ndarray
    right: np.ndarray
    cover: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        for name in ("features", "thresholds", "left", "right", "cover", "values"):
            array = getattr(self, name)
            if array.flags.writeable:
                array.setflags(write=False)
        self.validate()

    @classmethod
    def from_nodes(cls, nodes) -> "Tree":
        """Builds a tree from (feature, threshold, left, right, cover, value) tuples."""
        if not nodes:
            raise ModelFormatError("a tree needs at least one node")
        f, t, l, r, c, v = zip(*nodes)
        return cls(
            features=np.array(f, dtype=np.int64),
            thresholds=np.array(t, dtype=np.float64),
            left=np.array(l, dtype=np.int64),
            right=np.array(r, dtype=np.int64),
            cover=np.array(c, dtype=np.float64),
            values=np.array(v, dtype=np.float64),
        )

    @property
    def n_nodes(self) -> int:
        return len(self.features)

    def validate(self) -> None:
        n = len(self.features)
        if n == 0:
            raise ModelFormatError("a tree needs at least one node")
        for name in ("thresholds", "left", "right", "cover", "values"):
            if len(getattr(self, name)) != n:
                raise ModelFormatError(f"node array '{name}' has the wrong length")
        visited = np.zeros(n, dtype=bool)
        stack = [0]
        while stack:
            i = stack.pop()
            if visited[i]:
                raise ModelFormatError(f"node {i} is reachable twice (cycle or shared child)")
            visited[i] = True
            cover = self.cover[i]
            if not math.isfinite(cover) or cover < 0:
                raise ModelFormatError(f"node {i} has invalid cover {cover}")
            if self.features[i] == LEAF:
                if not math.isfinite(self.values[i]):
                    raise ModelFormatError(f"leaf {i} has a non-finite value")
                continue
            if self.features[i] < 0:
                raise ModelFormatError(f"node {i} has invalid split feature {self.features[i]}")
            if not math.isfinite(self.thresholds[i]):
                raise ModelFormatError(f"node {i} has a non-finite threshold")
            lc, rc = int(self.left[i]), int(self.right[i])
            if not (0 <= lc < n and 0 <= rc < n) or lc == rc:
                raise ModelFormatError(f"node {i} has invalid children ({lc}, {rc})")
            child_sum = self.cover[lc] + self.cover[rc]
            if abs(cover - child_sum) > _COVER_RTOL * max(1.0, cover):
                raise ModelFormatError(
                    f"node {i} cover {cover} differs from its children's {child_sum}")
            stack.extend((rc, lc))
        if not visited.all():
            raise ModelFormatError("tree has nodes unreachable from the root")

    @cached_property
    def lists(self) -> Tuple[list, list, list, list, list, list]:
        """Plain-Python copies of the node arrays for the per-node recursions."""
        return (self.features.tolist(), self.thresholds.tolist(), self.left.tolist(),
                self.right.tolist(), self.cover.tolist(), self.values.tolist())

    def leaf_value(self, x) -> float:
        features, thresholds, left, right, _, values = self.lists
        i = 0
        while features[i] != LEAF:
            i = left[i] if x[features[i]] <= thresholds[i] else right[i]
        return values[i]

    def split_features(self) -> Set[int]:
        return {int(f) for f in self.features if f != LEAF}

    def depth(self) -> int:
        features, _, left, right, _, _ = self.lists
        best, stack = 0, [(0, 0)]
        while stack:
            i, d = stack.pop()
            if features[i] == LEAF:
                best = max(best, d)
            else:
                stack.extend(((left[i], d + 1), (right[i], d + 1)))
        return best

    def structurally_equal(self, other: "Tree") -> bool:
        return all(np.array_equal(getattr(self, name), getattr(other, name))
                   for name in ("features", "thresholds", "left", "right", "cover", "values"))


@dataclass(frozen=True, eq=False)
class TreeEnsemble:
    """Additive model: margin(x) = base_margin + sum of the trees' leaf values."""
    trees: Tuple[Tree, ...]
    base_margin: float
    feature_count: int
    schema_fingerprint: str = ""

    def __post_init__(self):
        object.__setattr__(self, "trees", tuple(self.trees))
        if self.feature_count < 1:
            raise ModelFormatError("feature_count must be positive")
        if not math.isfinite(self.base_margin):
            raise ModelFormatError("base_margin must be finite")
        for t, tree in enumerate(self.trees):
            used = tree.split_features()
            if used and max(used) >= self.feature_count:
                raise ModelFormatError(f"tree {t} splits on feature {max(used)} >= {self.feature_count}")

    def _check_dim(self, x) -> None:
        if len(x) != self.feature_count:
            raise SchemaError(f"expected {self.feature_count} features, got {len(x)}")

    def predict_margin(self, x) -> float:
        self._check_dim(x)
        total = self.base_margin
        for tree in self.trees:
            total += tree.leaf_value(x)
        return total

    def predict_margins(self, X: np.ndarray) -> np.ndarray:
        return np.array([self.predict_margin(row) for row in X], dtype=np.float64)

    def predict_proba(self, x) -> float:
        return proba_from_margin(self.predict_margin(x))

    def predict_proba_loss(self, x) -> float:
        return 1.0 - self.predict_proba(x)

    def used_features(self) -> Set[int]:
        used: Set[int] = set()
        for tree in self.trees:
            used |= tree.split_features()
        return used

    def concat(self, other: "TreeEnsemble") -> "TreeEnsemble":
        if other.feature_count != self.feature_count:
            raise SchemaError("cannot concatenate ensembles over different feature counts")
        return TreeEnsemble(self.trees + other.trees, self.base_margin + other.base_margin,
                            self.feature_count, self.schema_fingerprint)

    def structurally_equal(self, other: "TreeEnsemble") -> bool:
        return (self.base_margin == other.base_margin
                and self.feature_count == other.feature_count
                and self.schema_fingerprint == other.schema_fingerprint
                and len(self.trees) == len(other.trees)
                and all(a.structurally_equal(b) for a, b in zip(self.trees, other.trees)))


def proba_from_margin(margin: float) -> float:
    """Logistic of the margin, kept strictly inside (0, 1)."""
    return float(min(max(expit(margin), _PROBA_FLOOR), _PROBA_CEIL))


def predict_margin(model: TreeEnsemble, x) -> float:
    return model.predict_margin(x)


def predict_proba(model: TreeEnsemble, x) -> float:
    return model.predict_proba(x)


def labelled_rows(samples: Sequence[Union[PairedSample, Tuple[np.ndarray, int]]]) -> Iterator[Tuple[np.ndarray, int]]:
    for sample in samples:
        if isinstance(sample, PairedSample):
            for _, x, y in sample.flattened():
                yield x, y
        else:
            x, y = sample
            yield x, int(y)


def evaluate_accuracy(model: TreeEnsemble, samples: Sequence[Union[PairedSample, Tuple[np.ndarray, int]]]) -> float:
    """
    Fraction of rows classified correctly. Accepts paired samples (both
    mirrored rows are scored) or plain (x, y) rows. proba == 0.5 predicts 1.
    """
    correct = total = 0
    for x, y in labelled_rows(samples):
        predicted = 1 if model.predict_proba(x) >= 0.5 else 0
        correct += predicted == y
        total += 1
    if total == 0:
        raise ValueError("cannot evaluate accuracy on an empty sample set")
    return correct / total
