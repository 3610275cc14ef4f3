from typing import List, Sequence, TextIO, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from app.errors import RefinementError, SchemaError
from app.state import AttributionVector, StatSchema


class ImportanceReport(BaseModel):
    """Mean |phi| per base stat over samples and all 2p slot copies; rank 1 is most important."""
    model_config = ConfigDict(frozen=True)

    stats: Tuple[str, ...]
    importance: Tuple[float, ...]
    ranks: Tuple[int, ...]

    def ordered(self) -> List[str]:
        return [stat for _, stat in sorted(zip(self.ranks, self.stats))]

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"stat": self.stats, "importance": self.importance, "rank": self.ranks})
        return frame.sort_values("rank", kind="mergesort").reset_index(drop=True)


def feature_importance(attributions: Sequence[AttributionVector], schema: StatSchema, p: int) -> ImportanceReport:
    if not attributions:
        raise RefinementError("feature importance needs at least one attribution")
    q = schema.q
    phi = np.vstack([a.phi for a in attributions])
    if phi.shape[1] != 2 * p * q:
        raise SchemaError(f"attributions have {phi.shape[1]} features, expected 2*{p}*{q}")
    importance = np.abs(phi).reshape(len(phi), 2 * p, q).mean(axis=(0, 1))
    order = np.argsort(-importance, kind="stable")
    ranks = np.empty(q, dtype=np.int64)
    ranks[order] = np.arange(1, q + 1)
    return ImportanceReport(stats=schema.stat_names, importance=tuple(importance.tolist()),
                            ranks=tuple(ranks.tolist()))


def write_importance(report: ImportanceReport, stream: TextIO) -> None:
    report.to_frame().to_csv(stream, index=False, lineterminator="\n", float_format="%.17g")
