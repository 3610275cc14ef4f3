from typing import List, Sequence, Tuple

from app.errors import RefinementError
from app.state import StatSchema

from .importance import ImportanceReport

StatGroup = Tuple[str, ...]


def group_features(report: ImportanceReport, top_k: int) -> List[StatGroup]:
    """The top_k stats each on their own, then every other stat in one remainder group."""
    n = len(report.stats)
    if top_k <= 0:
        raise RefinementError(f"top_k must be positive, got {top_k}")
    if top_k >= n:
        raise RefinementError(f"top_k must be below the number of stats ({n}), got {top_k}")
    ordered = report.ordered()
    singles = [(stat,) for stat in ordered[:top_k]]
    rest = set(ordered[top_k:])
    return singles + [tuple(stat for stat in report.stats if stat in rest)]


def parse_groups(text: str, schema: StatSchema) -> List[StatGroup]:
    """`a+b;c;d` lists groups separated by ';' with members joined by '+'; they must partition the schema."""
    groups = [tuple(m.strip() for m in part.split("+") if m.strip()) for part in text.split(";") if part.strip()]
    return check_partition(groups, schema)


def check_partition(groups: Sequence[StatGroup], schema: StatSchema) -> List[StatGroup]:
    seen = [stat for group in groups for stat in group]
    if any(not group for group in groups):
        raise RefinementError("stat groups must be non-empty")
    if len(seen) != len(set(seen)):
        raise RefinementError("a stat appears in more than one group")
    if set(seen) != set(schema.stat_names):
        missing = sorted(set(schema.stat_names) - set(seen))
        unknown = sorted(set(seen) - set(schema.stat_names))
        raise RefinementError(f"groups must partition the schema (missing {missing}, unknown {unknown})")
    return [tuple(group) for group in groups]
