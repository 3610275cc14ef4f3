import logging
import math
from collections import OrderedDict
from pathlib import Path
from typing import Dict, List, Optional, TextIO, Union

import pandas as pd

from app.errors import ParseError
from app.state import GameRecord, PlayerStatLine, StatSchema
from .base import Ingestor

logger = logging.getLogger(__name__)

KEY_COLUMNS = ("game_id", "season", "team_side", "player_id")
TEAM_SIDES = ("home", "away")
RESULT_SIDE = "result"
RESULT_MARKER = "home_win"


def _is_blank(row) -> bool:
    return all(not isinstance(cell, str) or not cell.strip() for cell in row)


class BoxScoreIngestor(Ingestor):
    """
    Reads the box-score CSV: one row per (game, player) with the schema's
    stats as columns. Outcomes come either from `result` rows
    (`game_id,season,result,home_win,<0|1>`) or from a sidecar mapping.
    """

    def __init__(self, schema: StatSchema, results: Optional[Dict[str, bool]] = None):
        self.schema = schema
        self.results = dict(results or {})
        self._percent = set(schema.percent_stats)

    def ingest(self, stream: TextIO) -> List[GameRecord]:
        frame = self._read_frame(stream)
        self._check_header(list(frame.columns))

        games: "OrderedDict[str, dict]" = OrderedDict()
        seen = set()
        stat_names = self.schema.stat_names
        for offset, row in enumerate(frame.itertuples(index=False, name=None)):
            line = offset + 2
            if _is_blank(row):
                continue
            if any(not isinstance(cell, str) for cell in row):
                raise ParseError("malformed row: wrong number of fields", line=line)
            game_id, season, side, player_id = (cell.strip() for cell in row[:4])
            if not game_id:
                raise ParseError("empty game_id", line=line, column="game_id")
            game = games.setdefault(game_id, {"season": season, "home": [], "away": [], "home_win": None})

            if side == RESULT_SIDE:
                game["home_win"] = self._parse_result(player_id, row[4], line)
                continue
            if side not in TEAM_SIDES:
                raise ParseError(f"team_side must be one of {TEAM_SIDES + (RESULT_SIDE,)}, got '{side}'",
                                 line=line, column="team_side")
            if not player_id:
                raise ParseError("empty player_id", line=line, column="player_id")
            if (game_id, player_id) in seen:
                raise ParseError(f"duplicate player '{player_id}' in game '{game_id}'", line=line,
                                 column="player_id")
            seen.add((game_id, player_id))
            values = tuple(self._parse_value(cell, stat, line) for cell, stat in zip(row[4:], stat_names))
            game[side].append(PlayerStatLine(player_id=player_id, values=values))

        records = []
        for game_id in sorted(games):
            game = games[game_id]
            home_win = game["home_win"]
            if home_win is None:
                home_win = self.results.get(game_id)
            if home_win is None:
                raise ParseError(f"no result recorded for game '{game_id}'")
            if not game["home"] or not game["away"]:
                raise ParseError(f"game '{game_id}' is missing a home or away roster")
            records.append(GameRecord(
                game_id=game_id,
                season=game["season"],
                home_roster=tuple(game["home"]),
                away_roster=tuple(game["away"]),
                home_win=home_win,
            ))
        logger.info("Ingested %d games, %d player lines", len(records), len(seen))
        return records

    def ingest_file(self, path: Union[str, Path]) -> List[GameRecord]:
        with open(path, encoding="utf-8", newline="") as handle:
            return self.ingest(handle)

    @staticmethod
    def _read_frame(stream: TextIO) -> pd.DataFrame:
        try:
            # blank lines stay in the frame so row offsets map to file lines
            return pd.read_csv(stream, dtype=str, keep_default_na=False, na_filter=False,
                               skip_blank_lines=False)
        except pd.errors.EmptyDataError:
            raise ParseError("box-score file is empty", line=1) from None
        except pd.errors.ParserError as exc:
            raise ParseError(f"malformed row: {exc}") from None

    def _check_header(self, columns: List[str]) -> None:
        columns = [c.strip() for c in columns]
        for i, key in enumerate(KEY_COLUMNS):
            if i >= len(columns) or columns[i] != key:
                raise ParseError(f"header must start with {','.join(KEY_COLUMNS)}", line=1, column=key)
        stats = columns[len(KEY_COLUMNS):]
        known = set(self.schema.stat_names)
        for column in stats:
            if column not in known:
                raise ParseError("unknown stat column", line=1, column=column)
        if tuple(stats) != self.schema.stat_names:
            missing = [s for s in self.schema.stat_names if s not in stats]
            if missing:
                raise ParseError(f"missing stat columns {missing}", line=1)
            raise ParseError("stat columns must follow the schema order", line=1)

    def _parse_value(self, cell: str, stat: str, line: int) -> float:
        text = cell.strip()
        if not text:
            # Percentages with zero attempts are left blank in box scores.
            if stat in self._percent:
                return 0.0
            raise ParseError("empty stat cell", line=line, column=stat)
        try:
            value = float(text)
        except ValueError:
            raise ParseError(f"not a number: '{text}'", line=line, column=stat) from None
        if not math.isfinite(value):
            raise ParseError(f"non-finite stat value '{text}'", line=line, column=stat)
        return value

    def _parse_result(self, marker: str, cell: str, line: int) -> bool:
        if marker != RESULT_MARKER:
            raise ParseError(f"result rows must name '{RESULT_MARKER}'", line=line, column="player_id")
        text = cell.strip()
        if text not in ("0", "1"):
            raise ParseError(f"home_win must be 0 or 1, got '{text}'", line=line,
                             column=self.schema.stat_names[0])
        return text == "1"


def parse_box_scores(stream: TextIO, schema: StatSchema,
                     results: Optional[Dict[str, bool]] = None) -> List[GameRecord]:
    return BoxScoreIngestor(schema, results).ingest(stream)


def read_results(stream: TextIO) -> Dict[str, bool]:
    """Sidecar outcome file: `game_id,home_win`."""
    try:
        frame = pd.read_csv(stream, dtype=str, keep_default_na=False, na_filter=False)
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as exc:
        raise ParseError(f"unreadable results file: {exc}") from None
    if list(frame.columns[:2]) != ["game_id", "home_win"]:
        raise ParseError("results header must be game_id,home_win", line=1)
    results = {}
    for offset, (game_id, flag) in enumerate(zip(frame["game_id"], frame["home_win"])):
        flag = str(flag).strip()
        if flag not in ("0", "1"):
            raise ParseError(f"home_win must be 0 or 1, got '{flag}'", line=offset + 2, column="home_win")
        results[str(game_id).strip()] = flag == "1"
    return results


def read_schema(path: Union[str, Path]) -> StatSchema:
    return StatSchema.from_json(Path(path).read_text(encoding="utf-8"))


def write_box_scores(games: List[GameRecord], schema: StatSchema, stream: TextIO) -> None:
    """Writes games in the ingestion format, one result row per game."""
    rows = []
    blanks = [""] * (schema.q - 1)
    for game in games:
        for line, is_home in game.lines():
            rows.append([game.game_id, game.season, "home" if is_home else "away", line.player_id,
                         *[repr(float(v)) for v in line.values]])
        rows.append([game.game_id, game.season, RESULT_SIDE, RESULT_MARKER, "1" if game.home_win else "0",
                     *blanks])
    frame = pd.DataFrame(rows, columns=list(KEY_COLUMNS) + list(schema.stat_names))
    frame.to_csv(stream, index=False, lineterminator="\n")
