from __future__ import annotations

from dataclasses import dataclass
import json
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from tailmix.distributions import BulkKind, MixtureSpec, ParamVector, sample_mixture
from tailmix.likelihood import FrequencyTable


@dataclass(frozen=True)
class FixtureSpec:
    name: str
    description: str
    spec: MixtureSpec
    params: ParamVector
    n: int
    seed: int

    def sample(self) -> NDArray[np.int64]:
        return sample_mixture(self.spec, self.params, self.n, seed=self.seed)

    def table(self) -> FrequencyTable:
        return FrequencyTable.from_observations(self.sample())

    def to_json(self) -> dict[str, object]:
        return {
            "name": self.name,
            "description": self.description,
            "bulk": self.spec.bulk.value,
            "constrained": self.spec.constrained,
            "params": {
                "xi1": self.params.xi1,
                "xi2": self.params.xi2,
                "sigma": self.params.sigma,
                "u": self.params.u,
                "phi_u": self.params.phi_u,
            },
            "n": self.n,
            "seed": self.seed,
        }


def fixture_dir() -> Path:
    return Path(__file__).resolve().parent / "datasets"


def available_fixtures() -> list[str]:
    return sorted(path.stem for path in fixture_dir().glob("*.json"))


def fixture_spec(name: str) -> FixtureSpec:
    path = fixture_dir() / f"{name}.json"
    if not path.is_file():
        raise ValueError(f"Unknown fixture {name!r}; available: {available_fixtures()}.")
    payload = json.loads(path.read_text(encoding="utf-8"))
    params = payload["params"]
    phi = params.get("phi_u")
    return FixtureSpec(
        name=name,
        description=str(payload.get("description", "")),
        spec=MixtureSpec(
            bulk=BulkKind.parse(payload["bulk"]), constrained=bool(payload["constrained"])
        ),
        params=ParamVector(
            xi1=float(params["xi1"]),
            xi2=float(params["xi2"]),
            sigma=float(params["sigma"]),
            u=int(params["u"]),
            phi_u=float(phi) if phi is not None else None,
        ),
        n=int(payload["n"]),
        seed=int(payload["seed"]),
    )


def load_fixture(name: str) -> FrequencyTable:
    """Materialise a bundled synthetic dataset from its parameters and seed."""
    return fixture_spec(name).table()
