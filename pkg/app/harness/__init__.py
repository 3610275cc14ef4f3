from .bounds import (
    BoundedSampler,
    binomial_slack,
    concentration_trial,
    constant_sampler,
    hoeffding_epsilon,
    required_games,
    uniform_sampler,
)
from .league import (
    LatentSkill,
    LeagueConfig,
    generate_league,
    league_schema,
    planted_best,
    planted_ground_truth,
    running_means,
    stat_names,
    write_skills,
)
