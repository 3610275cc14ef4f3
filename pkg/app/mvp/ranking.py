from collections import defaultdict
from typing import Dict, List, Sequence

from app.errors import RankingError
from app.state import PlayerContribution, RankingResult, RankMethod

from .base import GameLike, Ranker, competition_rank, game_entries, ranking_result


def rank_within_game(contribs: Sequence[PlayerContribution]) -> Dict[str, int]:
    return competition_rank({c.player_id: c.phi_total for c in contribs}, descending=True)


def single_game_mvp(contribs: GameLike) -> str:
    """Highest contribution on the winning team; ties go to the smallest player_id."""
    winners = [c for c in game_entries(contribs) if c.on_winning_team]
    if not winners:
        raise RankingError("game has no winning-team contributions")
    return min(winners, key=lambda c: (-c.phi_total, c.player_id)).player_id


def single_game_ranking(contribs: GameLike) -> RankingResult:
    """Winning-team players by contribution; rank 1 is the single-game MVP."""
    entries = [c for c in game_entries(contribs) if c.on_winning_team]
    if not entries:
        raise RankingError("game has no winning-team contributions")
    scores = {c.player_id: c.phi_total for c in entries}
    return ranking_result(RankMethod.SINGLE, scores, {pid: 1 for pid in scores})


class WinningGameRankRanker(Ranker):
    """Mean in-game rank over the games a player's team won."""
    method = RankMethod.M1

    def history(self, per_game):
        history: Dict[str, List[float]] = defaultdict(list)
        for game in per_game:
            entries = game_entries(game)
            ranks = rank_within_game(entries)
            for c in entries:
                if c.on_winning_team:
                    history[c.player_id].append(float(ranks[c.player_id]))
        return history


class AllGameRankRanker(Ranker):
    """Mean in-game rank over every game played, won or lost."""
    method = RankMethod.M2

    def history(self, per_game):
        history: Dict[str, List[float]] = defaultdict(list)
        for game in per_game:
            entries = game_entries(game)
            ranks = rank_within_game(entries)
            for c in entries:
                history[c.player_id].append(float(ranks[c.player_id]))
        return history


class MeanContributionRanker(Ranker):
    """Mean contribution over every game played."""
    method = RankMethod.M3

    def history(self, per_game):
        history: Dict[str, List[float]] = defaultdict(list)
        for game in per_game:
            for c in game_entries(game):
                history[c.player_id].append(c.phi_total)
        return history


RANKERS = {
    RankMethod.M1: WinningGameRankRanker,
    RankMethod.M2: AllGameRankRanker,
    RankMethod.M3: MeanContributionRanker,
}


def get_ranker(method) -> Ranker:
    method = RankMethod(method)
    if method not in RANKERS:
        raise RankingError(f"'{method.value}' is not a multi-game ranking method")
    return RANKERS[method]()


def rank_m1(per_game: Sequence[GameLike], min_games: int = 0) -> RankingResult:
    return WinningGameRankRanker().rank(per_game, min_games)


def rank_m2(per_game: Sequence[GameLike], min_games: int = 0) -> RankingResult:
    return AllGameRankRanker().rank(per_game, min_games)


def rank_m3(per_game: Sequence[GameLike], min_games: int = 0) -> RankingResult:
    return MeanContributionRanker().rank(per_game, min_games)


def season_totals(per_game: Sequence[GameLike]) -> Dict[str, float]:
    """Total contribution per player, summed game by game."""
    totals: Dict[str, float] = defaultdict(float)
    for game in per_game:
        for c in game_entries(game):
            totals[c.player_id] += c.phi_total
    return dict(totals)
