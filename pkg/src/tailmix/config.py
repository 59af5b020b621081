from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from tailmix.distributions import BulkKind
from tailmix.fixtures import load_fixture
from tailmix.ingest import ingest
from tailmix.likelihood import FrequencyTable
from tailmix.sampler import ConstraintMode, McmcConfig, PriorSpec

DATA_FORMATS: tuple[str, ...] = ("freq-csv", "raw", "edges")
_DEFAULT_LOG_LEVEL = "WARNING"
_DEFAULT_OUTPUT_DIR = Path("tailmix-out")
_LOG_LEVELS = {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}


@dataclass(frozen=True)
class EnvironmentConfig:
    seed: int | None
    log_level: str
    data_dir: Path | None

    @classmethod
    def from_env(cls) -> "EnvironmentConfig":
        seed_raw = os.getenv("TAILMIX_SEED", "").strip()
        seed = None
        if seed_raw:
            try:
                seed = int(seed_raw)
            except ValueError as exc:
                raise ValueError("TAILMIX_SEED must be an integer when set.") from exc
            if seed < 0:
                raise ValueError("TAILMIX_SEED must be nonnegative.")

        level = os.getenv("TAILMIX_LOG_LEVEL", "").strip().upper() or _DEFAULT_LOG_LEVEL
        if level not in _LOG_LEVELS:
            raise ValueError(
                f"TAILMIX_LOG_LEVEL must be one of {sorted(_LOG_LEVELS)}, got {level!r}."
            )

        data_dir_raw = os.getenv("TAILMIX_DATA_DIR", "").strip()
        return cls(
            seed=seed,
            log_level=level,
            data_dir=Path(data_dir_raw).expanduser() if data_dir_raw else None,
        )


def resolve_seed(explicit: int | None, env: EnvironmentConfig | None = None) -> int | None:
    if explicit is not None:
        return int(explicit)
    env = env or EnvironmentConfig.from_env()
    return env.seed


@dataclass(frozen=True)
class RunConfig:
    data_path: Path | None = None
    fixture: str | None = None
    data_format: str = "freq-csv"
    bulk: BulkKind = BulkKind.POWER_LAW
    mode: ConstraintMode = ConstraintMode.BOTH
    priors: PriorSpec = field(default_factory=PriorSpec)
    mcmc: McmcConfig = field(default_factory=McmcConfig)
    output_dir: Path = _DEFAULT_OUTPUT_DIR
    level: float = 0.99
    n_chains: int = 1

    def __post_init__(self) -> None:
        if (self.data_path is None) == (self.fixture is None):
            raise ValueError("Exactly one of a data path or a fixture name is required.")
        if self.data_format not in DATA_FORMATS:
            raise ValueError(
                f"Unknown data format {self.data_format!r}; expected one of {DATA_FORMATS}."
            )
        if not 0.0 < self.level < 1.0:
            raise ValueError(f"Band level must lie in (0, 1), got {self.level!r}.")
        if self.n_chains < 1:
            raise ValueError("n_chains must be a positive integer.")

    def to_json(self) -> dict[str, object]:
        mcmc = asdict(self.mcmc)
        mcmc["frozen_blocks"] = sorted(self.mcmc.frozen_blocks)
        if isinstance(self.mcmc.seed, np.random.SeedSequence):
            mcmc["seed"] = self.mcmc.seed.entropy
        return {
            "data_path": str(self.data_path) if self.data_path is not None else None,
            "fixture": self.fixture,
            "data_format": self.data_format,
            "bulk": self.bulk.value,
            "mode": self.mode.value,
            "priors": self.priors.to_json(),
            "mcmc": mcmc,
            "output_dir": str(self.output_dir),
            "level": self.level,
            "n_chains": self.n_chains,
        }

    def load_table(self) -> FrequencyTable:
        if self.fixture is not None:
            return load_fixture(self.fixture)
        assert self.data_path is not None
        return ingest(self.data_path, self.data_format)
