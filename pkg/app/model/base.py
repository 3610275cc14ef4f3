from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from .ensemble import TreeEnsemble, labelled_rows


class Trainer(ABC):
    @abstractmethod
    def fit(self, X: np.ndarray, y: np.ndarray) -> TreeEnsemble:
        pass

    def train(self, samples: Sequence) -> TreeEnsemble:
        """Fits on paired samples (both mirrored rows) or plain (x, y) rows."""
        rows = list(labelled_rows(samples))
        if not rows:
            return self.fit(np.zeros((0, 0)), np.zeros(0))
        X = np.vstack([x for x, _ in rows])
        y = np.array([label for _, label in rows], dtype=np.float64)
        return self.fit(X, y)
