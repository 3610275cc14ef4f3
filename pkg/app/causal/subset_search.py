import logging
from typing import List, Optional, Sequence, TextIO, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from app.config import TrainConfig
from app.dataset import SlotPolicy, project_games
from app.errors import MVPShapleyError, RefinementError
from app.state import GameRecord, GroundTruth, Metric, StatSchema

from .base import Refiner
from .grouping import StatGroup, check_partition

logger = logging.getLogger(__name__)

MAX_GROUPS = 12


class SubsetCandidate(BaseModel):
    model_config = ConfigDict(frozen=True)

    mask: int = Field(ge=1)
    included_groups: Tuple[int, ...]
    stats: Tuple[str, ...]
    metric: Metric
    score: Optional[float] = None
    error: Optional[str] = None
    rank: Optional[int] = None

    @property
    def failed(self) -> bool:
        return self.score is None


class SubsetSearch(Refiner):
    """Retrains and scores every non-empty union of stat groups."""

    def search(self, games: Sequence[GameRecord], schema: StatSchema,
               groups: Sequence[StatGroup] = ()) -> List[SubsetCandidate]:
        groups = check_partition(groups, schema)
        if len(groups) > MAX_GROUPS:
            raise RefinementError(f"at most {MAX_GROUPS} groups can be searched exhaustively")
        masks = list(range(1, 2 ** len(groups)))
        logger.info("Subset search over %d groups: %d candidates", len(groups), len(masks))
        candidates = self.fan_out(lambda mask: self._evaluate(games, schema, groups, mask), masks)
        return self._order(candidates)

    def _evaluate(self, games, schema: StatSchema, groups, mask: int) -> SubsetCandidate:
        included = tuple(g for g in range(len(groups)) if (mask >> g) & 1)
        stats = tuple(s for s in schema.stat_names if any(s in groups[g] for g in included))
        base = dict(mask=mask, included_groups=included, stats=stats, metric=self.metric)
        try:
            restricted = schema.restrict(stats)
            score = self.alignment(project_games(games, schema, restricted), restricted)
        except MVPShapleyError as e:
            logger.warning("Candidate %d (%s) failed: %s", mask, "+".join(stats), e)
            return SubsetCandidate(**base, error=str(e))
        logger.debug("Candidate %d scored %s=%.4f", mask, self.metric.value, score)
        return SubsetCandidate(**base, score=score)

    def _order(self, candidates: List[SubsetCandidate]) -> List[SubsetCandidate]:
        scored = sorted((c for c in candidates if not c.failed),
                        key=lambda c: (self.better_first_key(c.score), len(c.included_groups), c.mask))
        failed = sorted((c for c in candidates if c.failed), key=lambda c: c.mask)
        ranked = [c.model_copy(update={"rank": i + 1}) for i, c in enumerate(scored)]
        return ranked + failed


def subset_search(games: Sequence[GameRecord], schema: StatSchema, groups: Sequence[StatGroup],
                  truth: GroundTruth, metric: Metric = Metric.SRCC,
                  train_config: Optional[TrainConfig] = None, p: int = 13,
                  slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC, top_k: int = 3,
                  min_games: int = 0, workers: int = 1) -> List[SubsetCandidate]:
    """
    Every non-empty inclusion pattern of the groups, best alignment first.
    Ties prefer fewer groups, then the smaller bit mask. Candidates whose
    retrain or scoring failed come last, unranked, with their error.
    """
    refiner = SubsetSearch(truth, p, metric, train_config, slot_policy, top_k, min_games, workers)
    return refiner.search(games, schema, groups)


def describe_groups(groups: Sequence[StatGroup], included: Sequence[int]) -> str:
    return ";".join("+".join(groups[g]) for g in included)


def write_refinement_report(candidates: Sequence[SubsetCandidate], groups: Sequence[StatGroup],
                            stream: TextIO) -> None:
    """CSV `candidate,included_groups,metric,score,rank`; failed candidates leave score and rank empty."""
    frame = pd.DataFrame(
        [[c.mask, describe_groups(groups, c.included_groups), c.metric.value, c.score, c.rank]
         for c in candidates],
        columns=["candidate", "included_groups", "metric", "score", "rank"],
    )
    frame["rank"] = frame["rank"].astype("Int64")
    frame.to_csv(stream, index=False, lineterminator="\n", float_format="%.17g")
