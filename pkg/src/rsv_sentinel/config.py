"""Run configuration: YAML file plus command-line overrides (flags win).

All randomness flows from the single top-level seed, fanned out
deterministically per stage, so one number reproduces a full run.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from .errors import UsageError
from .evaluation import DEFAULT_GRIDS
from .simdata import DEFAULT_ROSTER

_STAGE_INDEX = {"split": 0, "cart": 1, "forest": 2, "boosting": 3}


def stage_seed(top_seed: int, stage: str) -> int:
    """Deterministic per-stage seed derived from the top-level seed."""
    ss = np.random.SeedSequence([int(top_seed), _STAGE_INDEX[stage]])
    return int(ss.generate_state(1)[0])


@dataclass
class RunConfig:
    sources: dict = field(default_factory=dict)  # kind -> csv path
    roster: tuple = DEFAULT_ROSTER
    seed: int = 42
    train_fraction: float = 0.8
    split_seed: Optional[int] = None   # derived from `seed` unless set
    min_days: int = 4
    max_reject_rate: float = 0.05
    cv_folds: int = 10
    grids: dict = field(default_factory=lambda: {k: dict(v)
                                                 for k, v in
                                                 DEFAULT_GRIDS.items()})
    out_dir: str = "out"
    bind_address: str = "127.0.0.1:8000"
    cors_origins: tuple = ("*",)
    exclude_states: tuple = ()

    def effective_split_seed(self) -> int:
        return self.split_seed if self.split_seed is not None \
            else stage_seed(self.seed, "split")

    def validate(self) -> None:
        if not 0.0 < self.train_fraction < 1.0:
            raise UsageError("split fraction must be in (0, 1)")
        if self.cv_folds < 2:
            raise UsageError("cv_folds must be at least 2")
        if len(self.roster) == 0:
            raise UsageError("roster must not be empty")
        unknown = set(self.exclude_states) - set(self.roster)
        if unknown:
            raise UsageError(
                f"exclude_states outside roster: {sorted(unknown)}")
        for kind, grid in self.grids.items():
            if kind not in DEFAULT_GRIDS:
                raise UsageError(f"unknown learner kind in grids: {kind!r}")
            if not grid or any(len(v) == 0 for v in grid.values()):
                raise UsageError(f"empty grid for {kind!r}")

    def to_manifest(self) -> dict:
        return {
            "sources": dict(self.sources),
            "roster": list(self.roster),
            "seed": self.seed,
            "split": {"fraction": self.train_fraction,
                      "seed": self.effective_split_seed()},
            "ingest": {"min_days": self.min_days,
                       "max_reject_rate": self.max_reject_rate},
            "cv_folds": self.cv_folds,
            "grids": {k: dict(v) for k, v in self.grids.items()},
            "out_dir": self.out_dir,
            "service": {"bind": self.bind_address,
                        "cors_origins": list(self.cors_origins)},
            "exclude_states": list(self.exclude_states),
        }


def load_config(path: Optional[str]) -> RunConfig:
    """Build a RunConfig from a YAML file; missing file means defaults."""
    config = RunConfig()
    if path is None:
        return config
    if not os.path.exists(path):
        raise UsageError(f"config file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            data = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise UsageError(f"invalid YAML in {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be a mapping")

    if "sources" in data:
        config.sources = dict(data["sources"])
    if "roster" in data:
        config.roster = tuple(data["roster"])
    if "seed" in data:
        config.seed = int(data["seed"])
    split = data.get("split", {})
    if "fraction" in split:
        config.train_fraction = float(split["fraction"])
    if "seed" in split:
        config.split_seed = int(split["seed"])
    ingest = data.get("ingest", {})
    if "min_days" in ingest:
        config.min_days = int(ingest["min_days"])
    if "max_reject_rate" in ingest:
        config.max_reject_rate = float(ingest["max_reject_rate"])
    if "cv_folds" in data:
        config.cv_folds = int(data["cv_folds"])
    if "grids" in data:
        for kind, grid in data["grids"].items():
            config.grids[kind] = {k: list(v) for k, v in grid.items()}
    if "out_dir" in data:
        config.out_dir = str(data["out_dir"])
    service = data.get("service", {})
    if "bind" in service:
        config.bind_address = str(service["bind"])
    if "cors_origins" in service:
        config.cors_origins = tuple(service["cors_origins"])
    if "exclude_states" in data:
        config.exclude_states = tuple(data["exclude_states"])
    return config
