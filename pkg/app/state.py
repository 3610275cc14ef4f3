import hashlib
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.errors import SchemaError


class StatSchema(BaseModel):
    """
    Canonical per-player stat layout. The order of `stat_names` is the
    feature order used by every downstream stage.
    """
    model_config = ConfigDict(frozen=True)

    stat_names: Tuple[str, ...]
    fuzzified_flags: Tuple[bool, ...] = ()
    playing_time_stat: Optional[str] = None
    percent_stats: Tuple[str, ...] = ()
    removed_stats: Tuple[str, ...] = ()
    # cut points of every fuzzified stat, so the fingerprint pins the binning
    bin_cuts: Dict[str, Tuple[float, ...]] = Field(default_factory=dict)

    @model_validator(mode="before")
    @classmethod
    def _default_flags(cls, data):
        if isinstance(data, dict) and not data.get("fuzzified_flags"):
            data = dict(data)
            data["fuzzified_flags"] = [False] * len(data.get("stat_names") or ())
        return data

    @model_validator(mode="after")
    def _check(self) -> "StatSchema":
        if not self.stat_names:
            raise SchemaError("schema lists no stats")
        if len(set(self.stat_names)) != len(self.stat_names):
            raise SchemaError(f"duplicate stat names in schema: {list(self.stat_names)}")
        if len(self.fuzzified_flags) != len(self.stat_names):
            raise SchemaError("fuzzified_flags must have one entry per stat")
        known = set(self.stat_names)
        for name in (self.playing_time_stat,) if self.playing_time_stat else ():
            if name not in known:
                raise SchemaError(f"playing-time stat '{name}' is not in the schema")
        for name in self.percent_stats + self.removed_stats + tuple(self.bin_cuts):
            if name not in known:
                raise SchemaError(f"unknown stat '{name}'")
        return self

    @property
    def q(self) -> int:
        return len(self.stat_names)

    def index(self, stat: str) -> int:
        try:
            return self.stat_names.index(stat)
        except ValueError:
            raise SchemaError(f"unknown stat '{stat}'") from None

    def is_fuzzified(self, stat: str) -> bool:
        return self.fuzzified_flags[self.index(stat)]

    def restrict(self, stats) -> "StatSchema":
        """Schema over a subset of stats, kept in canonical order."""
        keep = set(stats)
        unknown = keep - set(self.stat_names)
        if unknown:
            raise SchemaError(f"unknown stats: {sorted(unknown)}")
        if not keep:
            raise SchemaError("cannot restrict a schema to zero stats")
        names = tuple(s for s in self.stat_names if s in keep)
        return StatSchema(
            stat_names=names,
            fuzzified_flags=tuple(self.is_fuzzified(s) for s in names),
            playing_time_stat=self.playing_time_stat if self.playing_time_stat in keep else None,
            percent_stats=tuple(s for s in self.percent_stats if s in keep),
            removed_stats=tuple(s for s in self.removed_stats if s in keep),
            bin_cuts={s: cuts for s, cuts in self.bin_cuts.items() if s in keep},
        )

    def with_fuzzified(self, stat: str, removed: bool = False,
                       cut_points: Tuple[float, ...] = ()) -> "StatSchema":
        i = self.index(stat)
        flags = list(self.fuzzified_flags)
        flags[i] = True
        removed_stats = self.removed_stats
        if removed and stat not in removed_stats:
            removed_stats = removed_stats + (stat,)
        return self.model_copy(update={
            "fuzzified_flags": tuple(flags),
            "removed_stats": removed_stats,
            "percent_stats": tuple(s for s in self.percent_stats if s != stat),
            "bin_cuts": {**self.bin_cuts, stat: tuple(cut_points)},
        })

    def fingerprint(self, p: int) -> str:
        payload = json.dumps({"schema": self.model_dump(mode="json"), "p": p}, sort_keys=True)
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    @classmethod
    def from_json(cls, text: str) -> "StatSchema":
        data = json.loads(text)
        if isinstance(data, list):
            data = {"stat_names": data}
        return cls.model_validate(data)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2)


class PlayerStatLine(BaseModel):
    model_config = ConfigDict(frozen=True)

    player_id: str
    values: Tuple[float, ...]

    @field_validator("values")
    @classmethod
    def _finite(cls, values):
        for v in values:
            if not math.isfinite(v):
                raise ValueError("stat values must be finite")
        return values


class GameRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    game_id: str
    season: str = ""
    home_roster: Tuple[PlayerStatLine, ...]
    away_roster: Tuple[PlayerStatLine, ...]
    home_win: bool

    @model_validator(mode="after")
    def _check_rosters(self) -> "GameRecord":
        if not self.home_roster or not self.away_roster:
            raise SchemaError(f"game {self.game_id}: both rosters must be non-empty")
        ids = [line.player_id for line in self.home_roster + self.away_roster]
        if len(set(ids)) != len(ids):
            raise SchemaError(f"game {self.game_id}: player ids must be unique within a game")
        return self

    def lines(self):
        """Yield (player_line, is_home) for every rostered player."""
        for line in self.home_roster:
            yield line, True
        for line in self.away_roster:
            yield line, False

    def winners(self) -> Tuple[PlayerStatLine, ...]:
        return self.home_roster if self.home_win else self.away_roster


PAD = None


@dataclass(frozen=True, eq=False)
class PairedSample:
    """The two mirrored feature vectors of one game with complementary labels."""
    game_id: str
    x1: np.ndarray
    x2: np.ndarray
    y1: int
    y2: int
    home_slots: Tuple[Optional[str], ...]
    away_slots: Tuple[Optional[str], ...]

    def __post_init__(self):
        self.x1.setflags(write=False)
        self.x2.setflags(write=False)

    @property
    def sample_ids(self) -> Tuple[str, str]:
        return f"{self.game_id}:1", f"{self.game_id}:2"

    def flattened(self) -> List[Tuple[str, np.ndarray, int]]:
        id1, id2 = self.sample_ids
        return [(id1, self.x1, self.y1), (id2, self.x2, self.y2)]


@dataclass(frozen=True, eq=False)
class AttributionVector:
    """Per-feature Shapley values in margin units plus the model's expected margin."""
    phi: np.ndarray
    baseline: float
    sample_id: str = ""

    def total(self) -> float:
        return float(self.phi.sum()) + self.baseline


class PlayerContribution(BaseModel):
    model_config = ConfigDict(frozen=True)

    game_id: str
    player_id: str
    phi_total: float
    on_winning_team: bool
    is_home: bool = True


class RankMethod(str, Enum):
    SINGLE = "single"
    M1 = "m1"
    M2 = "m2"
    M3 = "m3"
    BASELINE = "baseline"

    @property
    def ascending(self) -> bool:
        """M1 and M2 rank by mean in-game rank, where smaller is better."""
        return self in (RankMethod.M1, RankMethod.M2)


class RankingEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    player_id: str
    score: float
    rank: int = Field(ge=1)
    games: int = 0


class RankingResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    method: RankMethod
    entries: Tuple[RankingEntry, ...]
    eligibility: int = 0

    @model_validator(mode="after")
    def _check_ranks(self) -> "RankingResult":
        ids = [e.player_id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise SchemaError("ranking lists a player twice")
        for i, entry in enumerate(self.entries):
            if i == 0:
                if entry.rank != 1:
                    raise SchemaError("ranking must start at rank 1")
                continue
            prev = self.entries[i - 1]
            expected = prev.rank if entry.score == prev.score else i + 1
            if entry.rank != expected:
                raise SchemaError(f"rank of {entry.player_id} is {entry.rank}, expected {expected}")
        return self

    def rank_map(self) -> Dict[str, int]:
        return {e.player_id: e.rank for e in self.entries}

    def player_ids(self) -> List[str]:
        return [e.player_id for e in self.entries]

    def top(self, k: int) -> List[str]:
        return self.player_ids()[:k]


class TruthScope(str, Enum):
    PER_GAME = "PER_GAME"
    SEASON = "SEASON"


class GroundTruth(BaseModel):
    """
    Vote-based ground truth. A SEASON truth holds one ordered vote list under
    `key`; a PER_GAME truth maps game ids to the voted MVP in `labels`.
    """
    model_config = ConfigDict(frozen=True)

    scope: TruthScope
    key: str = ""
    entries: Tuple[str, ...] = ()
    labels: Dict[str, str] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _no_duplicates(self) -> "GroundTruth":
        if len(set(self.entries)) != len(self.entries):
            raise SchemaError(f"truth '{self.key}' lists a player twice")
        return self

    def truth_rank(self) -> Dict[str, int]:
        return {pid: i + 1 for i, pid in enumerate(self.entries)}

    def truncated(self, k: int) -> "GroundTruth":
        return self.model_copy(update={"entries": self.entries[:k]})


class Metric(str, Enum):
    ARD = "ard"
    SRCC = "srcc"
    RECALL = "recall"
    ACC = "acc"

    @property
    def higher_is_better(self) -> bool:
        return self is not Metric.ARD
