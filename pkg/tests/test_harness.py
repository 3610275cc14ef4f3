import io
import math

import numpy as np
import pytest

from app.config import TrainConfig
from app.dataset import build_dataset
from app.errors import HarnessError
from app.harness import (
    BoundedSampler,
    LeagueConfig,
    binomial_slack,
    concentration_trial,
    constant_sampler,
    generate_league,
    hoeffding_epsilon,
    league_schema,
    planted_best,
    planted_ground_truth,
    required_games,
    running_means,
    stat_names,
    uniform_sampler,
    write_skills,
)
from app.model import train
from app.mvp import GameContributions, season_contributions
from app.state import PlayerContribution


def test_epsilon_values():
    assert hoeffding_epsilon(1.0, 4, 2 * math.exp(-2)) == pytest.approx(1.0)
    assert hoeffding_epsilon(1.0, 1000, 0.05) == pytest.approx(0.0859, abs=1e-4)


def test_required_games():
    assert required_games(1.0, 0.5, 0.05) == 141


@pytest.mark.parametrize("call", [
    lambda: hoeffding_epsilon(0.0, 10, 0.1),
    lambda: hoeffding_epsilon(1.0, 0, 0.1),
    lambda: hoeffding_epsilon(1.0, 10, 1.0),
    lambda: required_games(1.0, 0.0, 0.1),
])
def test_bound_domains(call):
    with pytest.raises(HarnessError):
        call()


def test_constant_sampler_never_violates():
    assert concentration_trial(constant_sampler(0.3), 1.0, 10, 0.05, 500) == 0.0


def test_out_of_range_sampler_is_rejected():
    wide = BoundedSampler(draw=lambda rng, size: np.full(size, 2.0), mean=2.0)
    with pytest.raises(HarnessError):
        concentration_trial(wide, 1.0, 5, 0.1, 10)


def test_trial_is_seeded():
    sampler = uniform_sampler()
    assert (concentration_trial(sampler, 1.0, 3, 0.5, 3000, seed=4)
            == concentration_trial(sampler, 1.0, 3, 0.5, 3000, seed=4, workers=3))


@pytest.mark.slow
@pytest.mark.parametrize("T", [100, 1000])
@pytest.mark.parametrize("delta", [0.05, 0.01])
def test_hoeffding_violation_rate(T, delta):
    trials = 10_000
    rate = concentration_trial(uniform_sampler(1.0), 1.0, T, delta, trials, seed=T, workers=2)
    assert rate <= delta + binomial_slack(delta, trials)


def test_league_is_reproducible():
    config = LeagueConfig(teams=4, players_per_team=3, games=10, seed=9)
    first, skills = generate_league(config)
    second, _ = generate_league(config)
    assert first == second
    assert len(skills) == 12
    for game in first:
        assert len(game.home_roster) == len(game.away_roster) == 3
        assert {line.player_id for line in game.home_roster}.isdisjoint(
            {line.player_id for line in game.away_roster})
        assert all(v >= 0 and v == round(v) for line, _ in game.lines() for v in line.values)


def test_league_config_checks_signal_stats():
    with pytest.raises(ValueError):
        LeagueConfig(stats=2, signal_stats=3)
    assert stat_names(LeagueConfig(stats=3, signal_stats=1)) == ["signal_1", "noise_1", "noise_2"]


def test_planted_truth_orders_by_true_value():
    _, skills = generate_league(LeagueConfig(games=1, seed=2))
    truth = planted_ground_truth(skills)
    values = {s.player_id: s.true_value for s in skills}
    assert truth.entries[0] == planted_best(skills)
    assert [values[p] for p in truth.entries] == sorted(values.values(), reverse=True)
    assert len(planted_ground_truth(skills, k=3).entries) == 3


def test_star_has_the_top_signal():
    config = LeagueConfig(games=1, seed=5, star_boost=3.0)
    _, skills = generate_league(config)
    ordered = sorted(skills, key=lambda s: -s.true_value)
    assert ordered[0].true_value - ordered[1].true_value >= 3.0 * config.signal_stats


def test_skills_csv_lists_true_value():
    config = LeagueConfig(teams=2, players_per_team=2, stats=2, signal_stats=1, games=1)
    _, skills = generate_league(config)
    buffer = io.StringIO()
    write_skills(skills, stat_names(config), buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "player_id,team,true_value,signal_1,noise_1"
    assert len(lines) == 5


def test_running_means():
    def game(gid, phi):
        contributions = tuple(PlayerContribution(game_id=gid, player_id=pid, phi_total=v, on_winning_team=True)
                              for pid, v in phi.items())
        return GameContributions(gid, contributions, 0.0, 0.0)

    per_game = [game("g1", {"a": 1.0}), game("g2", {"a": 3.0, "b": 2.0}), game("g3", {"b": 4.0})]
    means = running_means(per_game, [1, 3])
    assert means == {1: {"a": 1.0}, 3: {"a": 2.0, "b": 3.0}}
    with pytest.raises(HarnessError):
        running_means(per_game, [0])


def test_fixed_teams_keep_their_rosters():
    config = LeagueConfig(teams=4, players_per_team=3, games=10, seed=9, fixed_teams=True)
    games, _ = generate_league(config)
    for game in games:
        home = {line.player_id[:3] for line in game.home_roster}
        away = {line.player_id[:3] for line in game.away_roster}
        assert len(home) == len(away) == 1 and home != away


def test_pickup_rosters_mix_teammates():
    games, skills = generate_league(LeagueConfig(teams=4, players_per_team=3, games=40, seed=9))
    assert LeagueConfig().star_boost == 0.0
    mixed = [g for g in games if len({line.player_id[:3] for line in g.home_roster}) > 1]
    assert mixed
    assert {line.player_id for g in games for line, _ in g.lines()} == {s.player_id for s in skills}


def test_near_certain_delta_still_gives_a_finite_bound():
    delta = 1.0 - 1e-9
    assert hoeffding_epsilon(1.0, 10, delta) == pytest.approx(math.sqrt(2.0 * math.log(2.0) / 10.0), abs=1e-6)
    rate = concentration_trial(uniform_sampler(1.0), 1.0, 10, delta, 200, seed=0)
    assert rate < 0.5


@pytest.mark.slow
def test_running_mean_contribution_settles():
    checkpoints = (20, 80, 320)
    gaps = {t: [] for t in checkpoints}
    for seed in range(5):
        config = LeagueConfig(games=640, seed=seed)
        games, _ = generate_league(config)
        schema = league_schema(config)
        p = config.players_per_team
        model = train(build_dataset(games, schema, p), TrainConfig(num_trees=20, max_depth=2, seed=seed),
                      schema.fingerprint(p))
        means = running_means(season_contributions(model, games, schema, p), [*checkpoints, 640])
        limit = means[640]
        for t in checkpoints:
            gaps[t].append(float(np.median([abs(means[t][pid] - limit[pid]) for pid in means[20]])))
    medians = [float(np.median(gaps[t])) for t in checkpoints]
    assert medians[0] > medians[1] > medians[2]
