import concurrent.futures
from abc import ABC, abstractmethod
from typing import Callable, List, Optional, Sequence, TypeVar

from app.config import TrainConfig
from app.dataset import SlotPolicy, build_dataset
from app.errors import RefinementError
from app.eval import alignment_score
from app.model import GradientBoostedTrainer
from app.mvp import rank_m3, season_contributions, single_game_mvp
from app.state import GameRecord, GroundTruth, Metric, StatSchema, TruthScope

T = TypeVar("T")
R = TypeVar("R")


class Refiner(ABC):
    """
    Scores feature variants by how well the M3 ranking of a model retrained
    on them agrees with the ground truth.
    """

    def __init__(self, truth: GroundTruth, p: int, metric: Metric = Metric.SRCC,
                 train_config: Optional[TrainConfig] = None,
                 slot_policy: SlotPolicy = SlotPolicy.MINUTES_DESC,
                 top_k: int = 3, min_games: int = 0, workers: int = 1):
        self.truth = truth
        self.p = p
        self.metric = Metric(metric)
        self.train_config = train_config or TrainConfig()
        self.slot_policy = SlotPolicy(slot_policy)
        self.top_k = top_k
        self.min_games = min_games
        self.workers = workers
        wants_per_game = self.metric is Metric.ACC
        if wants_per_game != (truth.scope is TruthScope.PER_GAME):
            raise RefinementError(f"metric {self.metric.value} cannot be scored on a {truth.scope.value} truth")

    def alignment(self, games: Sequence[GameRecord], schema: StatSchema) -> float:
        samples = build_dataset(games, schema, self.p, self.slot_policy)
        model = GradientBoostedTrainer(self.train_config, schema.fingerprint(self.p)).train(samples)
        contributions = season_contributions(model, games, schema, self.p, self.slot_policy)
        if self.metric is Metric.ACC:
            predictions = {game.game_id: single_game_mvp(game) for game in contributions}
            return alignment_score(self.metric, None, self.truth, self.top_k, predictions)
        ranking = rank_m3(contributions, self.min_games)
        return alignment_score(self.metric, ranking, self.truth, self.top_k)

    def better_first_key(self, score: float) -> float:
        return -score if self.metric.higher_is_better else score

    def fan_out(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """Runs fn over items, in parallel when workers > 1; results keep item order."""
        if self.workers <= 1:
            return [fn(item) for item in items]
        with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
            return list(executor.map(fn, items))

    @abstractmethod
    def search(self, games: Sequence[GameRecord], schema: StatSchema):
        pass
