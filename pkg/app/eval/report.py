import logging
from typing import Dict, List, Optional, Sequence, TextIO

import pandas as pd
from pydantic import BaseModel, ConfigDict

from app.errors import EvaluationError, ParseError
from app.state import GroundTruth, RankingResult, TruthScope

from .metrics import accuracy, ard, mvp_rank, recall_at_k, srcc

logger = logging.getLogger(__name__)

TRUTH_COLUMNS = ["scope", "key", "rank", "player_id"]
REPORT_COLUMNS = ["metric", "value", "method", "scope"]


class MetricRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric: str
    value: float
    method: str
    scope: str


def read_ground_truth(stream: TextIO) -> List[GroundTruth]:
    """
    One SEASON truth per key, ordered by rank, plus at most one PER_GAME
    truth gathering every game label (rank must be 1 there).
    """
    try:
        frame = pd.read_csv(stream, dtype=str, keep_default_na=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise ParseError(f"unreadable ground-truth file: {e}") from e
    if list(frame.columns) != TRUTH_COLUMNS:
        raise ParseError(f"ground-truth header must be {','.join(TRUTH_COLUMNS)}")

    seasons: Dict[str, List[tuple]] = {}
    labels: Dict[str, str] = {}
    for idx, row in frame.iterrows():
        line = idx + 2
        try:
            rank = int(row["rank"])
        except ValueError:
            raise ParseError(f"rank '{row['rank']}' is not an integer", line=line, column="rank") from None
        scope = row["scope"].strip().upper()
        if scope == TruthScope.SEASON.value:
            seasons.setdefault(row["key"], []).append((rank, row["player_id"]))
        elif scope == TruthScope.PER_GAME.value:
            if rank != 1:
                raise ParseError("PER_GAME truth rows must have rank 1", line=line, column="rank")
            if row["key"] in labels:
                raise ParseError(f"game {row['key']} labelled twice", line=line, column="key")
            labels[row["key"]] = row["player_id"]
        else:
            raise ParseError(f"unknown scope '{row['scope']}'", line=line, column="scope")

    truths = [GroundTruth(scope=TruthScope.SEASON, key=key, entries=tuple(pid for _, pid in sorted(rows)))
              for key, rows in seasons.items()]
    if labels:
        truths.append(GroundTruth(scope=TruthScope.PER_GAME, labels=labels))
    if not truths:
        raise ParseError("ground-truth file holds no rows")
    return truths


def _scope_name(truth: GroundTruth) -> str:
    return f"{truth.scope.value}:{truth.key}" if truth.key else truth.scope.value


def evaluate_ranking(predicted: Optional[RankingResult], truths: Sequence[GroundTruth], top_k: int = 3,
                     per_game_predictions: Optional[Dict[str, str]] = None,
                     method: Optional[str] = None) -> List[MetricRow]:
    """
    Every metric the inputs allow: for a season truth ARD, SRCC, recall@K and
    the truth MVP's predicted rank, on the full truth list and on its top K;
    for a per-game truth, accuracy.
    """
    method = method or (predicted.method.value if predicted is not None else "single")
    rows: List[MetricRow] = []

    def emit(metric: str, fn, truth: GroundTruth, *args):
        try:
            value = float(fn(*args))
        except EvaluationError as e:
            logger.warning("Skipping %s on %s: %s", metric, _scope_name(truth), e)
            return
        rows.append(MetricRow(metric=metric, value=value, method=method, scope=_scope_name(truth)))

    for truth in truths:
        if truth.scope is TruthScope.PER_GAME:
            if per_game_predictions is not None:
                emit("acc", accuracy, truth, per_game_predictions, truth)
            continue
        if predicted is None:
            continue
        emit("ard", ard, truth, predicted, truth)
        emit("srcc", srcc, truth, predicted, truth)
        emit(f"recall@{top_k}", recall_at_k, truth, predicted, truth, top_k)
        emit("mvp_rank", mvp_rank, truth, predicted, truth)
        if len(truth.entries) > top_k:
            top = truth.truncated(top_k)
            emit(f"ard_top{top_k}", ard, truth, predicted, top)
            emit(f"srcc_top{top_k}", srcc, truth, predicted, top)
    if not rows:
        raise EvaluationError("no metric could be computed from the given prediction and truth")
    return rows


def write_report(rows: Sequence[MetricRow], stream: TextIO) -> None:
    frame = pd.DataFrame([row.model_dump() for row in rows], columns=REPORT_COLUMNS)
    frame.to_csv(stream, index=False, lineterminator="\n", float_format="%.17g")


def write_ground_truth(truths: Sequence[GroundTruth], stream: TextIO) -> None:
    rows = []
    for truth in truths:
        if truth.scope is TruthScope.SEASON:
            rows.extend([truth.scope.value, truth.key, i + 1, pid] for i, pid in enumerate(truth.entries))
        else:
            rows.extend([truth.scope.value, gid, 1, pid] for gid, pid in sorted(truth.labels.items()))
    pd.DataFrame(rows, columns=TRUTH_COLUMNS).to_csv(stream, index=False, lineterminator="\n")
