from typing import Dict, TextIO

import pandas as pd

from app.errors import ParseError
from app.state import RankingEntry, RankingResult, RankMethod

RANKING_COLUMNS = ["rank", "player_id", "score", "games", "method"]


def ranking_frame(result: RankingResult) -> pd.DataFrame:
    return pd.DataFrame(
        [[e.rank, e.player_id, e.score, e.games, result.method.value] for e in result.entries],
        columns=RANKING_COLUMNS,
    )


def write_ranking(result: RankingResult, stream: TextIO) -> None:
    ranking_frame(result).to_csv(stream, index=False, lineterminator="\n", float_format="%.17g")


def write_single_rankings(per_game: Dict[str, RankingResult], stream: TextIO) -> None:
    """One MVP line per game (the top entry of its ranking), with a leading game_id column."""
    frames = []
    for game_id, result in per_game.items():
        frame = ranking_frame(result).head(1)
        frame.insert(0, "game_id", game_id)
        frames.append(frame)
    combined = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=["game_id"] + RANKING_COLUMNS)
    combined.to_csv(stream, index=False, lineterminator="\n", float_format="%.17g")


def _read(stream: TextIO, required) -> pd.DataFrame:
    try:
        frame = pd.read_csv(stream, dtype={"player_id": str, "game_id": str})
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
        raise ParseError(f"unreadable ranking file: {e}") from e
    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise ParseError(f"ranking file lacks columns {missing}")
    return frame


def read_ranking(stream: TextIO) -> RankingResult:
    frame = _read(stream, RANKING_COLUMNS)
    if frame.empty:
        raise ParseError("ranking file holds no rows")
    methods = set(frame["method"])
    if len(methods) != 1:
        raise ParseError(f"ranking file mixes methods {sorted(methods)}")
    frame = frame.sort_values(["rank", "player_id"], kind="mergesort")
    entries = tuple(
        RankingEntry(player_id=row.player_id, score=float(row.score), rank=int(row.rank), games=int(row.games))
        for row in frame.itertuples(index=False)
    )
    return RankingResult(method=RankMethod(methods.pop()), entries=entries)


def read_single_predictions(stream: TextIO) -> Dict[str, str]:
    """game_id -> predicted MVP of a single-mode file (first rank-1 row per game)."""
    frame = _read(stream, ["game_id"] + RANKING_COLUMNS)
    frame = frame.sort_values(["game_id", "rank", "player_id"], kind="mergesort")
    top = frame.groupby("game_id", sort=True).head(1)
    return dict(zip(top["game_id"], top["player_id"]))
