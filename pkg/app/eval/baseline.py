import logging
from enum import Enum
from typing import Dict, Sequence

import pandas as pd
from pydantic import BaseModel, ConfigDict, model_validator

from app.errors import RankingError, SchemaError
from app.mvp import ranking_result
from app.state import GameRecord, RankingResult, RankMethod, StatSchema

logger = logging.getLogger(__name__)


class Normalization(str, Enum):
    MINMAX = "minmax"
    ZSCORE = "zscore"


class WeightSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    weights: Dict[str, float]
    normalization: Normalization = Normalization.MINMAX

    @model_validator(mode="after")
    def _nonzero(self) -> "WeightSpec":
        if not any(w != 0 for w in self.weights.values()):
            raise SchemaError("weight spec needs at least one nonzero weight")
        return self

    @classmethod
    def parse(cls, text: str, normalization: str = "minmax") -> "WeightSpec":
        """Reads `stat=weight,stat=weight` as given on the command line."""
        weights = {}
        for item in filter(None, (part.strip() for part in text.split(","))):
            stat, sep, value = item.rpartition("=")
            if not sep or not stat:
                raise SchemaError(f"weight '{item}' is not of the form stat=weight")
            weights[stat] = float(value)
        return cls(weights=weights, normalization=normalization)


def stat_lines_frame(games: Sequence[GameRecord], schema: StatSchema) -> pd.DataFrame:
    rows = [(game.game_id, line.player_id, *line.values) for game in games for line, _ in game.lines()]
    return pd.DataFrame(rows, columns=["game_id", "player_id", *schema.stat_names])


def baseline_rank(games: Sequence[GameRecord], schema: StatSchema, weights: WeightSpec,
                  min_games: int = 0) -> RankingResult:
    """
    Metric-weighting rating: each stat is normalized over every stat line in
    the pool, combined with the given weights and averaged per player.
    """
    unknown = [s for s in weights.weights if s not in schema.stat_names]
    if unknown:
        raise SchemaError(f"weights name unknown stats: {unknown}")
    frame = stat_lines_frame(games, schema)
    if frame.empty:
        raise SchemaError("no stat lines to rate")

    rating = pd.Series(0.0, index=frame.index)
    for stat, weight in weights.weights.items():
        if weight == 0:
            continue
        column = frame[stat]
        if weights.normalization is Normalization.MINMAX:
            spread = column.max() - column.min()
            normalized = (column - column.min()) / spread if spread > 0 else column * 0.0
        else:
            std = column.std(ddof=0)
            if std == 0:
                logger.warning("Skipping zero-variance stat '%s' in z-score baseline", stat)
                continue
            normalized = (column - column.mean()) / std
        rating += weight * normalized

    frame["rating"] = rating
    per_player = frame.groupby("player_id")["rating"].agg(["mean", "count"])
    per_player = per_player[per_player["count"] >= max(1, min_games)]
    if per_player.empty:
        raise RankingError(f"no player reaches the {min_games}-game eligibility threshold")
    scores = {str(pid): float(row["mean"]) for pid, row in per_player.iterrows()}
    counts = {str(pid): int(row["count"]) for pid, row in per_player.iterrows()}
    return ranking_result(RankMethod.BASELINE, scores, counts, min_games)
