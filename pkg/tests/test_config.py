from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from tailmix.config import EnvironmentConfig, RunConfig, resolve_seed
from tailmix.fixtures import load_fixture
from tailmix.sampler import McmcConfig


def test_environment_defaults(monkeypatch) -> None:
    for name in ("TAILMIX_SEED", "TAILMIX_LOG_LEVEL", "TAILMIX_DATA_DIR"):
        monkeypatch.delenv(name, raising=False)

    cfg = EnvironmentConfig.from_env()
    assert cfg.seed is None
    assert cfg.log_level == "WARNING"
    assert cfg.data_dir is None


def test_environment_values(monkeypatch, tmp_path: Path) -> None:
    monkeypatch.setenv("TAILMIX_SEED", " 42 ")
    monkeypatch.setenv("TAILMIX_LOG_LEVEL", "debug")
    monkeypatch.setenv("TAILMIX_DATA_DIR", str(tmp_path))

    cfg = EnvironmentConfig.from_env()
    assert cfg.seed == 42
    assert cfg.log_level == "DEBUG"
    assert cfg.data_dir == tmp_path


@pytest.mark.parametrize(
    ("name", "value"),
    [("TAILMIX_SEED", "abc"), ("TAILMIX_SEED", "-3"), ("TAILMIX_LOG_LEVEL", "loud")],
)
def test_environment_errors_name_the_variable(monkeypatch, name: str, value: str) -> None:
    monkeypatch.delenv("TAILMIX_SEED", raising=False)
    monkeypatch.delenv("TAILMIX_LOG_LEVEL", raising=False)
    monkeypatch.setenv(name, value)
    with pytest.raises(ValueError, match=name):
        EnvironmentConfig.from_env()


def test_explicit_seed_wins_over_environment(monkeypatch) -> None:
    monkeypatch.setenv("TAILMIX_SEED", "7")
    assert resolve_seed(None) == 7
    assert resolve_seed(3) == 3
    env = EnvironmentConfig(seed=None, log_level="INFO", data_dir=None)
    assert resolve_seed(None, env) is None


def test_run_config_requires_exactly_one_source(tmp_path: Path) -> None:
    with pytest.raises(ValueError, match="Exactly one"):
        RunConfig()
    with pytest.raises(ValueError, match="Exactly one"):
        RunConfig(data_path=tmp_path / "x.csv", fixture="geometric_constrained")
    with pytest.raises(ValueError, match="data format"):
        RunConfig(fixture="geometric_constrained", data_format="xlsx")
    with pytest.raises(ValueError, match="level"):
        RunConfig(fixture="geometric_constrained", level=1.0)


def test_run_config_loads_fixture_and_file(tmp_path: Path) -> None:
    config = RunConfig(fixture="geometric_constrained")
    assert config.load_table() == load_fixture("geometric_constrained")

    path = tmp_path / "raw.txt"
    path.write_text("1\n2\n2\n0\n", encoding="utf-8")
    table = RunConfig(data_path=path, data_format="raw").load_table()
    assert table.entries == ((1, 1), (2, 2))
    assert table.zero_count == 1


def test_run_config_json_records_seed_entropy() -> None:
    sequence = np.random.SeedSequence(1234)
    config = RunConfig(
        fixture="powerlaw_unconstrained",
        mcmc=McmcConfig(iterations=10, burn_in=0, seed=sequence, frozen_blocks=frozenset({"u"})),
    )
    payload = config.to_json()
    assert payload["mcmc"]["seed"] == 1234
    assert payload["mcmc"]["frozen_blocks"] == ["u"]
    assert payload["bulk"] == "power_law"
    assert payload["mode"] == "both"
    assert payload["data_path"] is None
