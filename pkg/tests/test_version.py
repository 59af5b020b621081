from __future__ import annotations

from pathlib import Path
import tomllib

import tailmix
from tailmix import _source_checkout_version


def test_package_version_matches_pyproject() -> None:
    pyproject_path = Path(__file__).resolve().parents[1] / "pyproject.toml"
    pyproject = tomllib.loads(pyproject_path.read_text(encoding="utf-8"))
    assert tailmix.__version__ == pyproject["project"]["version"]


def test_foreign_or_missing_pyproject_is_ignored(tmp_path: Path) -> None:
    assert _source_checkout_version(tmp_path / "pyproject.toml") is None
    foreign = tmp_path / "pyproject.toml"
    foreign.write_text('[project]\nname = "other"\nversion = "9.9"\n', encoding="utf-8")
    assert _source_checkout_version(foreign) is None
    foreign.write_text('[project]\nname = "tailmix"\nversion = "1.2.3"\n', encoding="utf-8")
    assert _source_checkout_version(foreign) == "1.2.3"


def test_core_types_are_exported() -> None:
    assert tailmix.BulkKind.parse("powerlaw") is tailmix.BulkKind.POWER_LAW
    assert set(tailmix.__all__) >= {"FrequencyTable", "MixtureSpec", "PriorSpec"}
