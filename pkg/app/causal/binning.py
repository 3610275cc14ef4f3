import json
import logging
import math
from pathlib import Path
from typing import List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from app.dataset import map_stat, stat_values
from app.errors import RefinementError
from app.state import GameRecord, StatSchema

logger = logging.getLogger(__name__)


class BinningSpec(BaseModel):
    """
    Ordinal buckets for one stat. `boundaries` holds the finite cut points
    followed by a +inf sentinel, so it has one entry per bucket and bucket j
    covers (B[j-1], B[j]].
    """
    model_config = ConfigDict(frozen=True)

    stat: str
    boundaries: Tuple[float, ...]
    source_quantiles: Tuple[float, ...] = ()

    @model_validator(mode="after")
    def _check(self) -> "BinningSpec":
        if not self.boundaries or self.boundaries[-1] != math.inf:
            raise RefinementError("boundaries must end with the +inf sentinel")
        if any(b >= c for b, c in zip(self.boundaries, self.boundaries[1:])):
            raise RefinementError("boundaries must be strictly increasing")
        return self

    @property
    def t(self) -> int:
        return len(self.boundaries)

    @property
    def cut_points(self) -> Tuple[float, ...]:
        return self.boundaries[:-1]

    @classmethod
    def from_cut_points(cls, stat: str, cut_points: Sequence[float], quantiles: Sequence[float] = ()) -> "BinningSpec":
        return cls(stat=stat, boundaries=tuple(float(c) for c in cut_points) + (math.inf,),
                   source_quantiles=tuple(quantiles))

    def to_dict(self) -> dict:
        return {"stat": self.stat, "boundaries": list(self.cut_points), "t": self.t}


def fit_bins(values: Sequence[float], t: int, stat: str = "") -> BinningSpec:
    """Cut points at the empirical j/t quantiles (linear interpolation), duplicates collapsed."""
    if t < 1:
        raise RefinementError(f"bin count must be at least 1, got {t}")
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise RefinementError("cannot fit bins on no values")
    quantiles = np.arange(1, t) / t
    if quantiles.size == 0:
        return BinningSpec.from_cut_points(stat, ())
    cuts = np.quantile(values, quantiles, method="linear")
    unique, first = np.unique(cuts, return_index=True)
    if len(unique) < len(cuts):
        logger.info("Bins for '%s' collapsed from %d to %d buckets", stat, t, len(unique) + 1)
    return BinningSpec.from_cut_points(stat, unique.tolist(), quantiles[first].tolist())


def apply_bins(value: float, spec: BinningSpec) -> int:
    """Bucket in 1..t: the first boundary not below the value (closed above)."""
    return int(np.searchsorted(spec.boundaries, value, side="left")) + 1


def apply_bins_array(values: np.ndarray, spec: BinningSpec) -> np.ndarray:
    return np.searchsorted(spec.boundaries, values, side="left") + 1


def fuzzify_games(games: Sequence[GameRecord], schema: StatSchema,
                  spec: BinningSpec) -> Tuple[List[GameRecord], StatSchema]:
    """Replace a stat by its bucket number; a single bucket marks the stat removed."""
    binned = map_stat(games, schema, spec.stat, lambda v: float(apply_bins(v, spec)))
    return binned, schema.with_fuzzified(spec.stat, removed=spec.t == 1, cut_points=spec.cut_points)


def fit_and_fuzzify(games: Sequence[GameRecord], schema: StatSchema, stat: str,
                    t: int) -> Tuple[List[GameRecord], StatSchema, BinningSpec]:
    spec = fit_bins(stat_values(games, schema, stat), t, stat)
    binned, fuzzified = fuzzify_games(games, schema, spec)
    return binned, fuzzified, spec


def write_binning(specs: Sequence[BinningSpec], path: Union[str, Path]) -> None:
    payload = [spec.to_dict() for spec in specs]
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_binning(path: Union[str, Path]) -> List[BinningSpec]:
    """Reads one `{stat, boundaries, t}` object or a list of them."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    items = raw if isinstance(raw, list) else [raw]
    specs = []
    for item in items:
        try:
            spec = BinningSpec.from_cut_points(item["stat"], item["boundaries"])
        except (KeyError, TypeError) as e:
            raise RefinementError(f"malformed binning entry {item!r}") from e
        if "t" in item and int(item["t"]) != spec.t:
            raise RefinementError(f"binning for '{spec.stat}' declares t={item['t']} but has {spec.t} buckets")
        specs.append(spec)
    return specs
