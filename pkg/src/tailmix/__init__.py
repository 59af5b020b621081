"""Discrete extreme value mixtures for heavy-tailed count data."""

from importlib.metadata import PackageNotFoundError
from importlib.metadata import version as _distribution_version
from pathlib import Path
import tomllib

_DISTRIBUTION = "tailmix"
_SOURCE_PYPROJECT = Path(__file__).resolve().parents[2] / "pyproject.toml"


def _source_checkout_version(pyproject_path: Path = _SOURCE_PYPROJECT) -> str | None:
    """Version from pyproject.toml when running from a tailmix source tree."""
    if not pyproject_path.is_file():
        return None
    project = tomllib.loads(pyproject_path.read_text(encoding="utf-8")).get("project", {})
    # src/ may sit inside some other project's checkout
    if project.get("name") != _DISTRIBUTION or not project.get("version"):
        return None
    return str(project["version"])


def _resolve_version() -> str:
    found = _source_checkout_version()
    if found is not None:
        return found
    try:
        return _distribution_version(_DISTRIBUTION)
    except PackageNotFoundError:
        return "0+unknown"


__version__ = _resolve_version()

from tailmix.distributions import BulkKind, MixtureSpec, ParamVector  # noqa: E402
from tailmix.likelihood import FrequencyTable  # noqa: E402
from tailmix.sampler import ConstraintMode, McmcConfig, PriorSpec  # noqa: E402

__all__ = [
    "BulkKind",
    "ConstraintMode",
    "FrequencyTable",
    "McmcConfig",
    "MixtureSpec",
    "ParamVector",
    "PriorSpec",
    "__version__",
]
