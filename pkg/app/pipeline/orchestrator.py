"""
Season pipeline: feature variant -> paired samples -> boosted model ->
tree attributions -> player contributions -> MVP ranking.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

from app.causal import BinningSpec, apply_variant
from app.config import TrainConfig
from app.dataset import SlotPolicy, build_dataset, split_train_test
from app.errors import RankingError
from app.model import GradientBoostedTrainer, TreeEnsemble, evaluate_accuracy
from app.mvp import (
    GameContributions,
    get_ranker,
    season_contributions,
    single_game_ranking,
)
from app.state import GameRecord, RankingResult, RankMethod, StatSchema

logger = logging.getLogger(__name__)


@dataclass
class TrainOutcome:
    model: TreeEnsemble
    accuracy: Optional[float]
    loss_history: List[float]
    train_games: int
    test_games: int


@dataclass
class PipelineResult:
    schema: StatSchema
    model: TreeEnsemble
    accuracy: Optional[float]
    contributions: List[GameContributions]
    ranking: Optional[RankingResult] = None
    single: Dict[str, RankingResult] = field(default_factory=dict)
    binning: List[BinningSpec] = field(default_factory=list)


class MVPShapleyPipeline:
    """
    Holds the run settings shared by every stage. `prepare` must run first:
    it fixes the (possibly reduced or fuzzified) schema the later stages use.
    """

    def __init__(self, schema: StatSchema, p: int, train_config: Optional[TrainConfig] = None,
                 slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC, drop: Sequence[str] = (),
                 bins: Optional[Dict[str, Optional[int]]] = None, binning: Sequence[BinningSpec] = (),
                 workers: int = 1):
        self.source_schema = schema
        self.schema = schema
        self.p = p
        self.train_config = train_config or TrainConfig()
        self.slot_policy = SlotPolicy(slot_policy)
        self.drop = list(drop)
        self.bins = dict(bins or {})
        self.binning = list(binning)
        self.workers = workers

    @property
    def fingerprint(self) -> str:
        return self.schema.fingerprint(self.p)

    def prepare(self, games: Sequence[GameRecord]) -> List[GameRecord]:
        games, self.schema, self.binning = apply_variant(games, self.source_schema, self.drop,
                                                         self.bins, self.binning)
        # bins fitted here are reused as saved specs on a later call
        self.bins = {}
        return games

    def train(self, games: Sequence[GameRecord], ratio: Optional[float] = None, seed: int = 0) -> TrainOutcome:
        """Trains on a by-game split when `ratio` is given, else on every game."""
        samples = build_dataset(games, self.schema, self.p, self.slot_policy)
        test = []
        if ratio is not None:
            samples, test = split_train_test(samples, ratio, seed)
        trainer = GradientBoostedTrainer(self.train_config, self.fingerprint)
        model = trainer.train(samples)
        accuracy = evaluate_accuracy(model, test) if test else None
        if accuracy is not None:
            logger.info("Held-out accuracy %.4f on %d games", accuracy, len(test))
        return TrainOutcome(model, accuracy, trainer.loss_history, len(samples), len(test))

    def contributions(self, model: TreeEnsemble, games: Sequence[GameRecord]) -> List[GameContributions]:
        return season_contributions(model, games, self.schema, self.p, self.slot_policy, self.workers)

    def rank(self, contributions: Sequence[GameContributions], method: RankMethod = RankMethod.M3,
             min_games: int = 0) -> RankingResult:
        method = RankMethod(method)
        if method is RankMethod.SINGLE:
            if len(contributions) != 1:
                raise RankingError("single-game ranking needs exactly one game; use rank_single")
            return single_game_ranking(contributions[0])
        return get_ranker(method).rank(contributions, min_games)

    def rank_single(self, contributions: Sequence[GameContributions]) -> Dict[str, RankingResult]:
        return {game.game_id: single_game_ranking(game) for game in contributions}

    def run(self, games: Sequence[GameRecord], method: RankMethod = RankMethod.M3, min_games: int = 0,
            ratio: Optional[float] = None, seed: int = 0, model: Optional[TreeEnsemble] = None) -> PipelineResult:
        games = self.prepare(games)
        accuracy = None
        if model is None:
            outcome = self.train(games, ratio, seed)
            model, accuracy = outcome.model, outcome.accuracy
        contributions = self.contributions(model, games)
        result = PipelineResult(schema=self.schema, model=model, accuracy=accuracy,
                                contributions=contributions, binning=list(self.binning))
        if RankMethod(method) is RankMethod.SINGLE:
            result.single = self.rank_single(contributions)
        else:
            result.ranking = self.rank(contributions, method, min_games)
        return result
