from typing import Optional


class MVPShapleyError(ValueError):
    """Base class for every domain error raised by the package."""


class ParseError(MVPShapleyError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[str] = None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column '{column}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class SchemaError(MVPShapleyError):
    pass


class TrainingError(MVPShapleyError):
    pass


class ModelFormatError(MVPShapleyError):
    pass


class FingerprintMismatchError(MVPShapleyError):
    pass


class AttributionError(MVPShapleyError):
    pass


class RankingError(MVPShapleyError):
    pass


class RefinementError(MVPShapleyError):
    pass


class EvaluationError(MVPShapleyError):
    pass


class HarnessError(MVPShapleyError):
    pass
