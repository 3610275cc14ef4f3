from abc import ABC, abstractmethod
from typing import List, TextIO

from app.state import GameRecord


class Ingestor(ABC):
    @abstractmethod
    def ingest(self, stream: TextIO) -> List[GameRecord]:
        pass
