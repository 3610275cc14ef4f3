import logging
from typing import Dict, List, Sequence, TextIO, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.errors import HarnessError
from app.mvp.base import GameLike, game_entries
from app.state import GameRecord, GroundTruth, PlayerStatLine, StatSchema, TruthScope

logger = logging.getLogger(__name__)


class LeagueConfig(BaseModel):
    """
    A synthetic league of `teams * players_per_team` players. Only the first
    `signal_stats` stats carry skill that decides games; the remaining stats
    are pure noise.

    By default every game draws both rosters at random from the whole pool.
    With `fixed_teams` a team always fields the same players, so teammates
    never appear apart and outcomes only identify team strength.
    """
    model_config = ConfigDict(frozen=True)

    teams: int = Field(default=8, ge=2)
    players_per_team: int = Field(default=5, ge=1)
    stats: int = Field(default=4, ge=1)
    games: int = Field(default=240, ge=1)
    skill_scale: float = Field(default=1.0, gt=0.0)
    noise_scale: float = Field(default=1.0, ge=0.0)
    stat_noise: float = Field(default=0.5, ge=0.0)
    stat_offset: float = Field(default=10.0, ge=0.0)
    signal_stats: int = Field(default=2, ge=1)
    star_boost: float = Field(default=0.0, ge=0.0)
    fixed_teams: bool = False
    season: str = "S1"
    seed: int = 0

    @model_validator(mode="after")
    def _check(self) -> "LeagueConfig":
        if self.signal_stats > self.stats:
            raise HarnessError(f"signal_stats ({self.signal_stats}) exceeds stats ({self.stats})")
        return self


class LatentSkill(BaseModel):
    model_config = ConfigDict(frozen=True)

    player_id: str
    team: int
    skill: Tuple[float, ...]
    true_value: float


def stat_names(config: LeagueConfig) -> List[str]:
    return ([f"signal_{i + 1}" for i in range(config.signal_stats)]
            + [f"noise_{i + 1}" for i in range(config.stats - config.signal_stats)])


def league_schema(config: LeagueConfig) -> StatSchema:
    return StatSchema(stat_names=tuple(stat_names(config)))


def player_id(team: int, k: int) -> str:
    return f"T{team:02d}P{k}"


def _draw_skills(config: LeagueConfig, rng: np.random.Generator) -> List[LatentSkill]:
    n_players = config.teams * config.players_per_team
    skills = rng.normal(0.0, config.skill_scale, size=(n_players, config.stats))
    # optional extra margin for the best player on the signal stats
    star = int(np.argmax(skills[:, :config.signal_stats].sum(axis=1)))
    skills[star, :config.signal_stats] += config.star_boost * config.skill_scale
    out = []
    for i in range(n_players):
        team, k = divmod(i, config.players_per_team)
        out.append(LatentSkill(player_id=player_id(team, k), team=team, skill=tuple(skills[i].tolist()),
                               true_value=float(skills[i, :config.signal_stats].sum())))
    return out


def _draw_sides(config: LeagueConfig, skills: Sequence[LatentSkill], by_team: Dict[int, List[LatentSkill]],
                rng: np.random.Generator) -> Tuple[List[LatentSkill], List[LatentSkill]]:
    if config.fixed_teams:
        home, away = (int(t) for t in rng.choice(config.teams, size=2, replace=False))
        return by_team[home], by_team[away]
    p = config.players_per_team
    drawn = rng.choice(len(skills), size=2 * p, replace=False)
    home = sorted(int(i) for i in drawn[:p])
    away = sorted(int(i) for i in drawn[p:])
    return [skills[i] for i in home], [skills[i] for i in away]


def generate_league(config: LeagueConfig) -> Tuple[List[GameRecord], List[LatentSkill]]:
    """
    Every game puts two disjoint rosters of `players_per_team` players on
    the floor. A player's stat is max(0, round(offset + skill + stat_noise *
    N(0, 1))); the home side wins when the difference of summed true values
    plus noise_scale * Logistic noise is positive, so noise_scale 1 gives
    P(win) = logistic(difference).
    """
    rng = np.random.default_rng(config.seed)
    skills = _draw_skills(config, rng)
    by_team: Dict[int, List[LatentSkill]] = {}
    for s in skills:
        by_team.setdefault(s.team, []).append(s)

    games: List[GameRecord] = []
    for g in range(config.games):
        sides = _draw_sides(config, skills, by_team, rng)
        rosters = []
        for side in sides:
            lines = []
            for s in side:
                noise = rng.normal(0.0, 1.0, size=config.stats) * config.stat_noise
                values = np.maximum(0.0, np.round(config.stat_offset + np.array(s.skill) + noise))
                lines.append(PlayerStatLine(player_id=s.player_id, values=tuple(values.tolist())))
            rosters.append(tuple(lines))
        diff = sum(s.true_value for s in sides[0]) - sum(s.true_value for s in sides[1])
        home_win = diff + config.noise_scale * rng.logistic() > 0
        games.append(GameRecord(game_id=f"G{g:05d}", season=config.season, home_roster=rosters[0],
                                away_roster=rosters[1], home_win=bool(home_win)))
    logger.info("Generated %d games for %d players", len(games), len(skills))
    return games, skills


def planted_best(skills: Sequence[LatentSkill]) -> str:
    return min(skills, key=lambda s: (-s.true_value, s.player_id)).player_id


def planted_ground_truth(skills: Sequence[LatentSkill], k: int = 0) -> GroundTruth:
    """Season truth ordering players by true value; k > 0 keeps the top k."""
    order = sorted(skills, key=lambda s: (-s.true_value, s.player_id))
    if k > 0:
        order = order[:k]
    return GroundTruth(scope=TruthScope.SEASON, key="planted", entries=tuple(s.player_id for s in order))


def write_skills(skills: Sequence[LatentSkill], names: Sequence[str], stream: TextIO) -> None:
    """CSV `player_id,team,true_value,<skill per stat>`."""
    frame = pd.DataFrame([[s.player_id, s.team, s.true_value, *s.skill] for s in skills],
                         columns=["player_id", "team", "true_value", *names])
    frame.to_csv(stream, index=False, lineterminator="\n", float_format="%.17g")


def running_means(per_game: Sequence[GameLike], checkpoints: Sequence[int]) -> Dict[int, Dict[str, float]]:
    """Mean contribution per player over the first T games, for each checkpoint T."""
    if any(t < 1 for t in checkpoints):
        raise HarnessError("checkpoints must be positive")
    totals: Dict[str, float] = {}
    counts: Dict[str, int] = {}
    out: Dict[int, Dict[str, float]] = {}
    wanted = sorted(set(checkpoints))
    for played, game in enumerate(per_game, start=1):
        for c in game_entries(game):
            totals[c.player_id] = totals.get(c.player_id, 0.0) + c.phi_total
            counts[c.player_id] = counts.get(c.player_id, 0) + 1
        if played in wanted:
            out[played] = {pid: totals[pid] / counts[pid] for pid in totals}
    return out
