from typing import Callable, List, Sequence

from app.state import GameRecord, PlayerStatLine, StatSchema


def _rewrite(games: Sequence[GameRecord], fn: Callable[[tuple], tuple]) -> List[GameRecord]:
    out = []
    for game in games:
        out.append(game.model_copy(update={
            "home_roster": tuple(PlayerStatLine(player_id=l.player_id, values=fn(l.values)) for l in game.home_roster),
            "away_roster": tuple(PlayerStatLine(player_id=l.player_id, values=fn(l.values)) for l in game.away_roster),
        }))
    return out


def project_games(games: Sequence[GameRecord], schema: StatSchema, target: StatSchema) -> List[GameRecord]:
    """Keeps only the stats of `target`, which must be a restriction of `schema`."""
    columns = [schema.index(s) for s in target.stat_names]
    return _rewrite(games, lambda values: tuple(values[c] for c in columns))


def map_stat(games: Sequence[GameRecord], schema: StatSchema, stat: str,
             fn: Callable[[float], float]) -> List[GameRecord]:
    k = schema.index(stat)
    return _rewrite(games, lambda values: values[:k] + (float(fn(values[k])),) + values[k + 1:])


def stat_values(games: Sequence[GameRecord], schema: StatSchema, stat: str) -> List[float]:
    k = schema.index(stat)
    return [line.values[k] for game in games for line, _ in game.lines()]
