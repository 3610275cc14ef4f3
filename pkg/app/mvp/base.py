from abc import ABC, abstractmethod
from typing import Dict, Sequence, Tuple, Union

import numpy as np
from scipy.stats import rankdata

from app.errors import RankingError
from app.state import PlayerContribution, RankingEntry, RankingResult, RankMethod

from .contribution import GameContributions

GameLike = Union[GameContributions, Sequence[PlayerContribution]]


def game_entries(game: GameLike) -> Tuple[PlayerContribution, ...]:
    if isinstance(game, GameContributions):
        return game.contributions
    return tuple(game)


def competition_rank(scores: Dict[str, float], descending: bool = True) -> Dict[str, int]:
    """Equal scores share the smaller rank and the next rank skips."""
    ids = sorted(scores)
    values = np.array([scores[pid] for pid in ids], dtype=float)
    ranks = rankdata(-values if descending else values, method="min")
    return {pid: int(r) for pid, r in zip(ids, ranks)}


def ranking_result(method: RankMethod, scores: Dict[str, float], games: Dict[str, int],
                   eligibility: int = 0) -> RankingResult:
    ranks = competition_rank(scores, descending=not method.ascending)
    order = sorted(scores, key=lambda pid: (ranks[pid], pid))
    entries = tuple(RankingEntry(player_id=pid, score=scores[pid], rank=ranks[pid], games=games.get(pid, 0))
                    for pid in order)
    return RankingResult(method=method, entries=entries, eligibility=eligibility)


class Ranker(ABC):
    method: RankMethod

    @abstractmethod
    def history(self, per_game: Sequence[GameLike]) -> Dict[str, list]:
        """Per player, the values that get averaged into the score."""
        pass

    def rank(self, per_game: Sequence[GameLike], min_games: int = 0) -> RankingResult:
        if not per_game:
            raise RankingError("no games to rank")
        history = self.history(per_game)
        threshold = max(1, min_games)
        eligible = {pid: values for pid, values in history.items() if len(values) >= threshold}
        if not eligible:
            raise RankingError(f"no player reaches the {threshold}-game eligibility threshold")
        scores = {pid: sum(values) / len(values) for pid, values in eligible.items()}
        games = {pid: len(values) for pid, values in eligible.items()}
        return ranking_result(self.method, scores, games, min_games)
