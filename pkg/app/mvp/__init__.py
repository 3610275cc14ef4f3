from .base import Ranker, competition_rank, ranking_result
from .contribution import (
    GameContributions,
    check_model_schema,
    contributions_from_attributions,
    game_contributions,
    player_contribution,
    season_contributions,
)
from .io import read_ranking, read_single_predictions, write_ranking, write_single_rankings
from .ranking import (
    RANKERS,
    AllGameRankRanker,
    MeanContributionRanker,
    WinningGameRankRanker,
    get_ranker,
    rank_m1,
    rank_m2,
    rank_m3,
    rank_within_game,
    season_totals,
    single_game_mvp,
    single_game_ranking,
)
