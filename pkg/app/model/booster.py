import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit

from app.config import TrainConfig
from app.errors import TrainingError
from .base import Trainer
from .ensemble import LEAF, Tree, TreeEnsemble

logger = logging.getLogger(__name__)

_MAX_HALVINGS = 40


def binary_log_loss(y: np.ndarray, margin: np.ndarray) -> float:
    """Mean of -(y log p + (1 - y) log(1 - p)) with p = logistic(margin)."""
    return float(np.mean(np.logaddexp(0.0, margin) - y * margin))


def _leaf_value(G: float, H: float, config: TrainConfig) -> float:
    denominator = H + config.l2_leaf_reg
    if denominator <= 0.0:
        return 0.0
    return -config.learning_rate * G / denominator


class _TreeBuilder:
    """Exact greedy depth-limited tree on one round's gradients and hessians."""

    def __init__(self, X: np.ndarray, g: np.ndarray, h: np.ndarray, config: TrainConfig):
        self.X = X
        self.g = g
        self.h = h
        self.config = config
        self.nodes: List[Optional[list]] = []
        self.leaf_of_row = np.full(len(X), -1, dtype=np.int64)

    def build(self) -> Tuple[List[list], np.ndarray]:
        self._grow(np.arange(len(self.X)), 0)
        return self.nodes, self.leaf_of_row

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        node_id = len(self.nodes)
        self.nodes.append(None)
        G = float(self.g[idx].sum())
        H = float(self.h[idx].sum())
        split = None
        if depth < self.config.max_depth and len(idx) >= 2 * self.config.min_samples_leaf:
            split = self._best_split(idx, G, H)
        if split is None:
            self.nodes[node_id] = [LEAF, 0.0, -1, -1, float(len(idx)), _leaf_value(G, H, self.config)]
            self.leaf_of_row[idx] = node_id
            return node_id
        feature, threshold = split
        goes_left = self.X[idx, feature] <= threshold
        left = self._grow(idx[goes_left], depth + 1)
        right = self._grow(idx[~goes_left], depth + 1)
        self.nodes[node_id] = [feature, threshold, left, right, float(len(idx)), 0.0]
        return node_id

    def _best_split(self, idx: np.ndarray, G: float, H: float) -> Optional[Tuple[int, float]]:
        lam = self.config.l2_leaf_reg
        min_leaf = self.config.min_samples_leaf
        n = len(idx)
        g, h = self.g[idx], self.h[idx]
        position = np.arange(1, n)  # rows on the left of a cut after position k-1
        size_ok = (position >= min_leaf) & (n - position >= min_leaf)
        with np.errstate(divide="ignore", invalid="ignore"):
            parent = G * G / (H + lam)

        best_gain = self.config.min_split_gain
        best = None
        # Ascending feature order with a strict comparison pins ties to the
        # lowest feature; argmax pins them to the lowest threshold.
        for feature in range(self.X.shape[1]):
            column = self.X[idx, feature]
            order = np.argsort(column, kind="stable")
            v = column[order]
            valid = size_ok & (v[:-1] < v[1:])
            if not valid.any():
                continue
            GL = np.cumsum(g[order])[:-1]
            HL = np.cumsum(h[order])[:-1]
            GR = G - GL
            HR = H - HL
            with np.errstate(divide="ignore", invalid="ignore"):
                gain = GL * GL / (HL + lam) + GR * GR / (HR + lam) - parent
            gain = np.where(valid & np.isfinite(gain), gain, -np.inf)
            k = int(np.argmax(gain))
            if gain[k] > best_gain:
                best_gain = float(gain[k])
                lo, hi = float(v[k]), float(v[k + 1])
                threshold = (lo + hi) / 2.0
                if not lo <= threshold < hi:
                    threshold = lo
                best = (feature, threshold)
        return best


class GradientBoostedTrainer(Trainer):
    """
    Newton boosting on binary log loss. Each round fits one exact-greedy tree
    to g = p - y, h = p(1 - p) with leaf value -lr * G / (H + l2). Node covers
    are sample counts. Training is deterministic; `config.seed` is recorded
    but no step draws random numbers.
    """

    def __init__(self, config: Optional[TrainConfig] = None, schema_fingerprint: str = ""):
        self.config = config or TrainConfig()
        self.schema_fingerprint = schema_fingerprint
        self.loss_history: List[float] = []

    def fit(self, X: np.ndarray, y: np.ndarray) -> TreeEnsemble:
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
            raise TrainingError("no training samples")
        if len(y) != len(X):
            raise TrainingError(f"{len(X)} rows but {len(y)} labels")
        if not np.all((y == 0.0) | (y == 1.0)):
            raise TrainingError("labels must be 0 or 1")
        if not np.all(np.isfinite(X)):
            raise TrainingError("features must be finite")
        mean = float(y.mean())
        if mean in (0.0, 1.0):
            raise TrainingError("training set holds a single class")

        base_margin = float(np.log(mean / (1.0 - mean)))
        margin = np.full(len(y), base_margin)
        loss = binary_log_loss(y, margin)
        self.loss_history = [loss]
        trees: List[Tree] = []
        for round_ in range(self.config.num_trees):
            p = expit(margin)
            nodes, leaf_of_row = _TreeBuilder(X, p - y, p * (1.0 - p), self.config).build()
            nodes, margin, loss = self._accept(nodes, leaf_of_row, y, margin, loss)
            trees.append(Tree.from_nodes(nodes))
            self.loss_history.append(loss)
            logger.debug("round %d: %d nodes, loss %.6f", round_, len(nodes), loss)

        logger.info("Trained %d trees on %d rows x %d features (final loss %.4f)",
                    len(trees), X.shape[0], X.shape[1], loss)
        return TreeEnsemble(tuple(trees), base_margin, X.shape[1], self.schema_fingerprint)

    @staticmethod
    def _accept(nodes, leaf_of_row, y, margin, loss):
        """Halve the round's leaf values until training loss does not rise."""
        values = np.array([node[5] for node in nodes])
        for _ in range(_MAX_HALVINGS):
            candidate = margin + values[leaf_of_row]
            new_loss = binary_log_loss(y, candidate)
            if new_loss <= loss:
                for node, value in zip(nodes, values):
                    node[5] = float(value)
                return nodes, candidate, new_loss
            values = values / 2.0
        for node in nodes:
            node[5] = 0.0
        return nodes, margin, loss


def train(samples: Sequence, config: TrainConfig, schema_fingerprint: str = "") -> TreeEnsemble:
    return GradientBoostedTrainer(config, schema_fingerprint).train(samples)
