import logging
from typing import Dict, List, Optional, Sequence, Tuple

from app.config import BIN_PRESETS
from app.dataset import project_games
from app.errors import RefinementError
from app.state import GameRecord, StatSchema

from .binning import BinningSpec, fit_and_fuzzify, fuzzify_games

logger = logging.getLogger(__name__)


def drop_stats(games: Sequence[GameRecord], schema: StatSchema,
               drop: Sequence[str]) -> Tuple[List[GameRecord], StatSchema]:
    if not drop:
        return list(games), schema
    for stat in drop:
        schema.index(stat)
    kept = schema.restrict([s for s in schema.stat_names if s not in set(drop)])
    logger.info("Dropping stats %s", list(drop))
    return project_games(games, schema, kept), kept


def parse_bins(items: Sequence[str]) -> Dict[str, Optional[int]]:
    """`stat=t` pairs; a bare `stat` takes its preset bin count."""
    bins: Dict[str, Optional[int]] = {}
    for item in items:
        stat, sep, value = item.rpartition("=")
        if not sep:
            bins[item] = None
            continue
        try:
            bins[stat] = int(value)
        except ValueError:
            raise RefinementError(f"bin count in '{item}' is not an integer") from None
    return bins


def apply_variant(games: Sequence[GameRecord], schema: StatSchema, drop: Sequence[str] = (),
                  bins: Optional[Dict[str, Optional[int]]] = None,
                  specs: Sequence[BinningSpec] = ()) -> Tuple[List[GameRecord], StatSchema, List[BinningSpec]]:
    """
    Drops stats, then fuzzifies: saved binning specs are applied as they are,
    `bins` entries are fitted on these games (None takes the preset).
    """
    both = sorted({spec.stat for spec in specs} & set(bins or {}))
    if both:
        raise RefinementError(f"stats {both} have a saved binning and a bin count to fit")
    games, schema = drop_stats(games, schema, drop)
    fitted: List[BinningSpec] = []
    for spec in specs:
        games, schema = fuzzify_games(games, schema, spec)
        fitted.append(spec)
    for stat, t in (bins or {}).items():
        if t is None:
            if stat not in BIN_PRESETS:
                raise RefinementError(f"no preset bin count for '{stat}'")
            t = BIN_PRESETS[stat]
        games, schema, spec = fit_and_fuzzify(games, schema, stat, t)
        logger.info("Fuzzified '%s' into %d buckets", stat, spec.t)
        fitted.append(spec)
    return games, schema, fitted
