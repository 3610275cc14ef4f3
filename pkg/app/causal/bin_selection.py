import logging
from typing import List, Optional, Sequence, TextIO

import pandas as pd
from pydantic import BaseModel, ConfigDict

from app.config import TrainConfig
from app.dataset import SlotPolicy
from app.errors import MVPShapleyError, RefinementError
from app.state import GameRecord, GroundTruth, Metric, StatSchema

from .base import Refiner
from .binning import fit_and_fuzzify

logger = logging.getLogger(__name__)


class BinCountScore(BaseModel):
    model_config = ConfigDict(frozen=True)

    stat: str
    t: int
    metric: Metric
    score: Optional[float] = None
    error: Optional[str] = None


class BinCountSelection(Refiner):
    def __init__(self, stat: str, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.stat = stat

    def search(self, games: Sequence[GameRecord], schema: StatSchema,
               t_candidates: Sequence[int] = ()) -> List[BinCountScore]:
        if not t_candidates:
            raise RefinementError("no bin counts to choose from")
        schema.index(self.stat)
        candidates = sorted(set(int(t) for t in t_candidates))
        return self.fan_out(lambda t: self._evaluate(games, schema, t), candidates)

    def _evaluate(self, games, schema: StatSchema, t: int) -> BinCountScore:
        try:
            binned, fuzzified, _ = fit_and_fuzzify(games, schema, self.stat, t)
            score = self.alignment(binned, fuzzified)
        except MVPShapleyError as e:
            logger.warning("Bin count %d for '%s' failed: %s", t, self.stat, e)
            return BinCountScore(stat=self.stat, t=t, metric=self.metric, error=str(e))
        return BinCountScore(stat=self.stat, t=t, metric=self.metric, score=score)

    def best(self, scores: Sequence[BinCountScore]) -> int:
        usable = [s for s in scores if s.score is not None]
        if not usable:
            raise RefinementError(f"every bin count failed for '{self.stat}'")
        return min(usable, key=lambda s: (self.better_first_key(s.score), s.t)).t


def score_bin_counts(games: Sequence[GameRecord], schema: StatSchema, stat: str, t_candidates: Sequence[int],
                     truth: GroundTruth, metric: Metric = Metric.SRCC,
                     train_config: Optional[TrainConfig] = None, p: int = 13,
                     slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC, top_k: int = 3,
                     min_games: int = 0, workers: int = 1) -> List[BinCountScore]:
    selection = BinCountSelection(stat, truth, p, metric, train_config, slot_policy, top_k, min_games, workers)
    return selection.search(games, schema, t_candidates)


def select_bin_count(games: Sequence[GameRecord], schema: StatSchema, stat: str, t_candidates: Sequence[int],
                     truth: GroundTruth, metric: Metric = Metric.SRCC,
                     train_config: Optional[TrainConfig] = None, p: int = 13,
                     slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC, top_k: int = 3,
                     min_games: int = 0, workers: int = 1) -> int:
    """Bin count with the best alignment; ties go to the smaller count."""
    distinct = sorted(set(int(t) for t in t_candidates))
    if len(distinct) == 1:
        return distinct[0]
    selection = BinCountSelection(stat, truth, p, metric, train_config, slot_policy, top_k, min_games, workers)
    return selection.best(selection.search(games, schema, t_candidates))


def write_bin_report(scores: Sequence[BinCountScore], stream: TextIO) -> None:
    frame = pd.DataFrame([s.model_dump(mode="json") for s in scores],
                         columns=["stat", "t", "metric", "score", "error"])
    frame.to_csv(stream, index=False, lineterminator="\n", float_format="%.17g")
