from typing import Dict, Mapping, Optional

import numpy as np
from scipy.stats import rankdata

from app.errors import EvaluationError
from app.state import GroundTruth, Metric, RankingResult, TruthScope


def _truth_ranks(predicted: RankingResult, truth: GroundTruth):
    ranks = predicted.rank_map()
    missing = [pid for pid in truth.entries if pid not in ranks]
    if missing:
        raise EvaluationError(f"truth players missing from the predicted pool: {missing}")
    return (np.array([ranks[pid] for pid in truth.entries], dtype=np.float64),
            np.array([truth.truth_rank()[pid] for pid in truth.entries], dtype=np.float64))


def ard(predicted: RankingResult, truth: GroundTruth) -> float:
    """Mean absolute gap between pool-wide predicted rank and vote rank of the truth players."""
    if not truth.entries:
        raise EvaluationError("truth list is empty")
    predicted_ranks, truth_ranks = _truth_ranks(predicted, truth)
    return float(np.mean(np.abs(predicted_ranks - truth_ranks)))


def srcc(predicted: RankingResult, truth: GroundTruth) -> float:
    """
    Spearman correlation on the truth players, 1 - 6 sum(d^2) / (n(n^2 - 1)).
    Predicted ranks are re-ranked among the truth players, ties averaged.
    """
    ranks = predicted.rank_map()
    common = [pid for pid in truth.entries if pid in ranks]
    n = len(common)
    if n < 2:
        raise EvaluationError(f"need at least 2 common players, got {n}")
    predicted_ranks = rankdata([ranks[pid] for pid in common], method="average")
    truth_ranks = rankdata([truth.truth_rank()[pid] for pid in common], method="average")
    d = predicted_ranks - truth_ranks
    return float(1.0 - 6.0 * np.sum(d * d) / (n * (n * n - 1)))


def recall_at_k(predicted: RankingResult, truth: GroundTruth, k: int) -> float:
    if k < 1:
        raise EvaluationError("K must be at least 1")
    if len(predicted.entries) < k or len(truth.entries) < k:
        raise EvaluationError(
            f"K={k} exceeds list length (predicted {len(predicted.entries)}, truth {len(truth.entries)})")
    return len(set(predicted.top(k)) & set(truth.entries[:k])) / k


def accuracy(per_game_predictions: Mapping[str, str], truth: GroundTruth) -> float:
    """Share of predicted games whose MVP matches the voted label; unlabeled games are ignored."""
    if truth.scope is not TruthScope.PER_GAME:
        raise EvaluationError("accuracy needs a PER_GAME ground truth")
    labelled = [gid for gid in per_game_predictions if gid in truth.labels]
    if not labelled:
        raise EvaluationError("no predicted game carries a truth label")
    hits = sum(per_game_predictions[gid] == truth.labels[gid] for gid in labelled)
    return hits / len(labelled)


def mvp_rank(predicted: RankingResult, truth: GroundTruth) -> int:
    """Predicted rank of the first player of the truth list."""
    if not truth.entries:
        raise EvaluationError("truth list is empty")
    ranks = predicted.rank_map()
    top = truth.entries[0]
    if top not in ranks:
        raise EvaluationError(f"truth MVP {top} missing from the predicted pool")
    return ranks[top]


def alignment_score(metric: Metric, predicted: Optional[RankingResult], truth: GroundTruth,
                    k: int = 3, per_game_predictions: Optional[Dict[str, str]] = None) -> float:
    metric = Metric(metric)
    if metric is Metric.ACC:
        if per_game_predictions is None:
            raise EvaluationError("accuracy needs per-game predictions")
        return accuracy(per_game_predictions, truth)
    if predicted is None:
        raise EvaluationError(f"{metric.value} needs a predicted ranking")
    if metric is Metric.ARD:
        return ard(predicted, truth)
    if metric is Metric.SRCC:
        return srcc(predicted, truth)
    return recall_at_k(predicted, truth, k)
