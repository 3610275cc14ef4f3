import concurrent.futures
import logging
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from app.errors import AttributionError
from app.model import TreeEnsemble
from app.state import AttributionVector, PairedSample
from .base import Explainer
from .tree_shap import TreeShapExplainer

logger = logging.getLogger(__name__)


def _identified_rows(samples) -> List[Tuple[str, np.ndarray]]:
    rows = []
    for sample in samples:
        if isinstance(sample, PairedSample):
            rows.extend((sid, x) for sid, x, _ in sample.flattened())
        else:
            sid, x = sample
            rows.append((sid, x))
    return rows


def batch_attribute(model: TreeEnsemble,
                    samples: Sequence[Union[PairedSample, Tuple[str, np.ndarray]]],
                    workers: int = 1,
                    explainer: Optional[Explainer] = None) -> List[AttributionVector]:
    """
    Attributes every row, in input order. Paired samples contribute both
    mirrored rows (x1 then x2). A failing row aborts the batch with its
    sample id in the message.
    """
    explainer = explainer or TreeShapExplainer(model)
    rows = _identified_rows(samples)

    def explain(row):
        sid, x = row
        try:
            return explainer.explain(x, sid)
        except Exception as e:
            raise AttributionError(f"sample {sid}: {e}") from e

    if workers <= 1 or len(rows) <= 1:
        vectors = [explain(row) for row in rows]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=workers) as executor:
            vectors = list(executor.map(explain, rows))
    logger.info("Attributed %d rows with %d worker(s)", len(vectors), max(1, workers))
    return vectors
