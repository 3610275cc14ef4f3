from abc import ABC, abstractmethod

from app.model import TreeEnsemble
from app.state import AttributionVector


class Explainer(ABC):
    def __init__(self, model: TreeEnsemble):
        self.model = model

    @abstractmethod
    def explain(self, x, sample_id: str = "") -> AttributionVector:
        pass
