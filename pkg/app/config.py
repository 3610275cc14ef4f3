import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

ENV_PREFIX = "MVPSHAP_"

# Fuzzification presets: bin counts used for the two dominant NBA stats.
BIN_PRESETS: Dict[str, int] = {"+/-": 3, "DRtg": 8}


class TrainConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    num_trees: int = Field(default=50, ge=1)
    max_depth: int = Field(default=3, ge=1)
    min_samples_leaf: int = Field(default=5, ge=1)
    learning_rate: float = Field(default=0.3, gt=0.0, le=1.0)
    l2_leaf_reg: float = Field(default=1.0, ge=0.0)
    min_split_gain: float = Field(default=0.0, ge=0.0)
    seed: int = 0


class RunConfig(BaseModel):
    """
    Everything a CLI command needs. Loaded from an optional JSON file, then
    overridden by explicit flags.
    """
    data: Optional[Path] = None
    results: Optional[Path] = None
    schema_path: Optional[Path] = None
    model: Optional[Path] = None
    truth: Optional[Path] = None
    predictions: Optional[Path] = None
    binning: Optional[Path] = None
    out: Optional[Path] = None
    attributions: Optional[Path] = None

    seed: Optional[int] = None
    p: Optional[int] = Field(default=None, ge=1)
    ratio: float = Field(default=0.9, gt=0.0, lt=1.0)
    method: str = "m3"
    metric: str = "srcc"
    top_k: int = Field(default=3, ge=1)
    min_games: int = Field(default=0, ge=0)
    groups: int = Field(default=2, ge=1)
    group_spec: Optional[str] = None
    stat: Optional[str] = None
    weights: Optional[str] = None
    normalization: str = "minmax"
    bins: Dict[str, Optional[int]] = Field(default_factory=dict)
    bin_candidates: List[int] = Field(default_factory=lambda: [1, 2, 3, 4, 6, 8])
    drop: List[str] = Field(default_factory=list)
    slot_policy: str = "minutes_desc"
    workers: int = Field(default=1, ge=1)
    strict: bool = False
    train: TrainConfig = Field(default_factory=TrainConfig)
    # Trade-off weight between bias reduction and information loss when
    # choosing a bin count. Bin selection uses validation alignment instead;
    # the field is kept so config files can record it.
    bias_tradeoff: float = Field(default=0.5, ge=0.0, le=1.0)


def env_defaults() -> Dict[str, Any]:
    """Defaults taken from MVPSHAP_* environment variables (after .env is loaded)."""
    load_dotenv()
    defaults: Dict[str, Any] = {}
    if os.getenv(f"{ENV_PREFIX}WORKERS"):
        defaults["workers"] = int(os.environ[f"{ENV_PREFIX}WORKERS"])
    if os.getenv(f"{ENV_PREFIX}SEED"):
        defaults["seed"] = int(os.environ[f"{ENV_PREFIX}SEED"])
    return defaults


def log_level_default() -> str:
    load_dotenv()
    return os.getenv(f"{ENV_PREFIX}LOG_LEVEL", "INFO")


def load_run_config(path: Optional[Path], overrides: Dict[str, Any]) -> RunConfig:
    """Merge environment defaults, the config file and explicit flag overrides, in that order."""
    data: Dict[str, Any] = env_defaults()
    if path is not None:
        data.update(json.loads(Path(path).read_text(encoding="utf-8")))
    train_overrides = overrides.pop("train", None) or {}
    data.update({k: v for k, v in overrides.items() if v is not None})
    if train_overrides:
        merged = dict(data.get("train") or {})
        merged.update({k: v for k, v in train_overrides.items() if v is not None})
        data["train"] = merged
    return RunConfig.model_validate(data)
