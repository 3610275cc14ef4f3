from typing import Sequence, TextIO

import pandas as pd

from app.state import AttributionVector


def attribution_frame(vectors: Sequence[AttributionVector]) -> pd.DataFrame:
    width = len(vectors[0].phi) if vectors else 0
    columns = ["sample_id", "baseline"] + [f"phi_{i + 1}" for i in range(width)]
    rows = [[v.sample_id, v.baseline, *v.phi.tolist()] for v in vectors]
    return pd.DataFrame(rows, columns=columns)


def write_attributions(vectors: Sequence[AttributionVector], stream: TextIO) -> None:
    """CSV `sample_id,baseline,phi_1,...,phi_n`, one row per attributed sample."""
    attribution_frame(vectors).to_csv(stream, index=False, lineterminator="\n", float_format="%.17g")
