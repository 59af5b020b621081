"""Discrete extreme value mixture kernels.

A mixture places a truncated bulk (geometric or discrete power law) on
``1..u`` with total mass ``1 - phi_u`` and an integer-valued GPD (IGPD) on
``u+1, u+2, ...`` with mass ``phi_u``. The tail scale is parametrised
threshold-independently, ``sigma_u = sigma + xi2 * u``.

All evaluation functions are pure; everything is computed in log space.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from tailmix.special_functions import (
    LOG_ZERO,
    DomainError,
    hurwitz_zeta,
    log1m_exp,
    log_diff_exp_array,
    partial_power_sum,
)

logger = logging.getLogger(__name__)

XI2_EPSILON = 1e-8
INT64_MAX = int(np.iinfo(np.int64).max)


class BulkKind(str, Enum):
    GEOMETRIC = "geometric"
    POWER_LAW = "power_law"

    @classmethod
    def parse(cls, value: "str | BulkKind") -> "BulkKind":
        if isinstance(value, BulkKind):
            return value
        normalized = str(value).strip().lower().replace("-", "_")
        if normalized in {"powerlaw", "power_law", "power"}:
            return cls.POWER_LAW
        if normalized in {"geometric", "geom", "geo"}:
            return cls.GEOMETRIC
        raise ValueError(f"Unknown bulk kind: {value!r} (expected geometric or powerlaw).")


@dataclass(frozen=True)
class MixtureSpec:
    bulk: BulkKind
    constrained: bool

    @property
    def model(self) -> int:
        """Model indicator M: 1 for the continuity-constrained variant."""
        return 1 if self.constrained else 0

    @property
    def label(self) -> str:
        mode = "constrained" if self.constrained else "unconstrained"
        return f"{self.bulk.value}-igpd/{mode}"


@dataclass(frozen=True)
class ParamVector:
    xi1: float
    xi2: float
    sigma: float
    u: int
    phi_u: float | None = None

    @property
    def sigma_u(self) -> float:
        return self.sigma + self.xi2 * self.u

    def with_phi(self, phi_u: float) -> "ParamVector":
        return replace(self, phi_u=float(phi_u))

    def is_valid(self) -> bool:
        return (
            math.isfinite(self.xi1)
            and math.isfinite(self.xi2)
            and math.isfinite(self.sigma)
            and self.xi1 > 0.0
            and self.sigma > 0.0
            and int(self.u) == self.u
            and self.u >= 1
            and self.sigma_u > 0.0
        )

    def check(self) -> None:
        if not self.is_valid():
            raise DomainError(
                "Invalid mixture parameters: need xi1 > 0, sigma > 0, integer u >= 1 "
                f"and sigma + xi2*u > 0; got {self!r}."
            )
        if self.phi_u is not None and not 0.0 <= self.phi_u <= 1.0:
            raise DomainError(f"phi_u must lie in [0, 1], got {self.phi_u!r}.")


def _log(value: float) -> float:
    return math.log(value) if value > 0.0 else LOG_ZERO


def _require_phi(params: ParamVector) -> float:
    if params.phi_u is None:
        raise DomainError("phi_u must be resolved before evaluating the mixture.")
    return float(params.phi_u)


# ---------------------------------------------------------------------------
# GPD / IGPD tail


def tail_log_survival(
    excess: ArrayLike, xi2: float, sigma_u: float
) -> NDArray[np.float64]:
    """log of [1 + xi2*t/sigma_u]_+^(-1/xi2) for excess t = z - u >= 0."""
    t = np.asarray(excess, dtype=float)
    if abs(xi2) < XI2_EPSILON:
        return -t / sigma_u
    arg = xi2 * t / sigma_u
    inside = arg > -1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        body = -np.log1p(np.where(inside, arg, 0.0)) / xi2
    return np.where(inside, body, LOG_ZERO)


def gpd_conditional_cdf(x: float, u: int, xi2: float, sigma: float) -> float:
    sigma_u = sigma + xi2 * u
    if not sigma_u > 0.0:
        raise DomainError(f"Tail scale sigma + xi2*u must be positive, got {sigma_u!r}.")
    if x < u:
        raise DomainError(f"gpd_conditional_cdf requires x >= u, got x={x!r}, u={u!r}.")
    log_sf = float(tail_log_survival(x - u, xi2, sigma_u))
    return float(-math.expm1(log_sf))


def igpd_log_pmf_array(
    xs: ArrayLike, u: int, xi2: float, sigma_u: float
) -> NDArray[np.float64]:
    x = np.asarray(xs, dtype=float)
    upper = tail_log_survival(x - 1.0 - u, xi2, sigma_u)
    lower = tail_log_survival(x - u, xi2, sigma_u)
    return log_diff_exp_array(upper, lower)


def igpd_log_pmf(x: int, params: ParamVector) -> float:
    params.check()
    if x <= params.u:
        raise DomainError(f"igpd_log_pmf requires x > u, got x={x!r}, u={params.u!r}.")
    return float(igpd_log_pmf_array(x, params.u, params.xi2, params.sigma_u))


def gpd_conditional_log_density(
    z: float, u: float, xi: float, sigma0: float, mu: float
) -> float:
    """Conditional GPD log-density above u in the (mu, sigma0, xi) form."""
    scale_u = sigma0 + xi * (u - mu)
    if not (sigma0 > 0.0 and scale_u > 0.0):
        raise DomainError("GPD scale must be positive above the threshold.")
    if z < u:
        raise DomainError(f"Density is conditional on z >= u, got z={z!r}, u={u!r}.")
    if abs(xi) < XI2_EPSILON:
        return -math.log(scale_u) - (z - u) / scale_u
    arg = 1.0 + xi * (z - u) / scale_u
    if arg <= 0.0:
        return LOG_ZERO
    return -math.log(scale_u) - (1.0 / xi + 1.0) * math.log(arg)


def pareto_log_density(z: float, u: float, alpha: float) -> float:
    if not alpha > 1.0:
        raise DomainError(f"Pareto exponent must exceed 1, got {alpha!r}.")
    if not (u > 0.0 and z >= u):
        raise DomainError(f"Pareto density needs z >= u > 0, got z={z!r}, u={u!r}.")
    return math.log(alpha - 1.0) - math.log(u) - alpha * math.log(z / u)


# ---------------------------------------------------------------------------
# bulk


def bulk_log_mass(xs: ArrayLike, bulk: BulkKind, xi1: float) -> NDArray[np.float64]:
    """Unnormalised log(H(x) - H(x-1)) for integer x >= 1."""
    x = np.asarray(xs, dtype=float)
    if bulk is BulkKind.GEOMETRIC:
        return log1m_exp(-1.0 / xi1) - (x - 1.0) / xi1
    return -(1.0 / xi1 + 1.0) * np.log(x)


def bulk_log_normalizer(bulk: BulkKind, xi1: float, u: int) -> float:
    """log H(u)."""
    if bulk is BulkKind.GEOMETRIC:
        return log1m_exp(-u / xi1)
    return math.log(partial_power_sum(1.0 / xi1 + 1.0, u))


def bulk_log_upper_fraction(
    xs: ArrayLike, bulk: BulkKind, xi1: float, u: int
) -> NDArray[np.float64]:
    """log(1 - H(x-1)/H(u)) for 1 <= x <= u."""
    x = np.asarray(xs, dtype=float)
    log_norm = bulk_log_normalizer(bulk, xi1, u)
    if bulk is BulkKind.GEOMETRIC:
        return log_diff_exp_array(-(x - 1.0) / xi1, -u / xi1) - log_norm
    alpha = 1.0 / xi1 + 1.0
    weights = np.power(np.arange(1, u + 1, dtype=float), -alpha)
    upper_sums = np.cumsum(weights[::-1])[::-1]
    with np.errstate(divide="ignore"):
        return np.log(upper_sums[x.astype(np.int64) - 1]) - log_norm


def bulk_log_pmf(x: int, spec: MixtureSpec, params: ParamVector) -> float:
    params.check()
    if not 1 <= x <= params.u:
        raise DomainError(f"bulk_log_pmf requires 1 <= x <= u, got x={x!r}, u={params.u!r}.")
    log_mass = float(bulk_log_mass(x, spec.bulk, params.xi1))
    return log_mass - bulk_log_normalizer(spec.bulk, params.xi1, params.u)


def constrained_phi(
    spec: MixtureSpec, xi1: float, xi2: float, sigma: float, u: int
) -> float:
    """Exceedance probability making the underlying density continuous at u.

    Balances the bulk mass rate (1 - phi) h(u) / H(u) against the tail
    density phi / sigma_u at the threshold.
    """
    candidate = ParamVector(xi1=xi1, xi2=xi2, sigma=sigma, u=u)
    candidate.check()
    log_h = float(bulk_log_mass(u, spec.bulk, xi1))
    log_norm = bulk_log_normalizer(spec.bulk, xi1, u)
    log_tail_side = log_h + math.log(candidate.sigma_u)
    return math.exp(log_tail_side - np.logaddexp(log_norm, log_tail_side))


# ---------------------------------------------------------------------------
# mixture


def log_pmf_curve(
    xs: ArrayLike, spec: MixtureSpec, params: ParamVector
) -> NDArray[np.float64]:
    params.check()
    phi = _require_phi(params)
    x = np.asarray(xs, dtype=np.int64)
    if np.any(x < 1):
        raise DomainError("The mixture is supported on positive integers only.")
    out = np.empty(x.shape, dtype=float)
    in_bulk = x <= params.u
    if np.any(in_bulk):
        log_norm = bulk_log_normalizer(spec.bulk, params.xi1, params.u)
        out[in_bulk] = (
            _log(1.0 - phi) + bulk_log_mass(x[in_bulk], spec.bulk, params.xi1) - log_norm
        )
    if np.any(~in_bulk):
        out[~in_bulk] = _log(phi) + igpd_log_pmf_array(
            x[~in_bulk], params.u, params.xi2, params.sigma_u
        )
    return out


def mixture_log_pmf(x: int, spec: MixtureSpec, params: ParamVector) -> float:
    if x < 1:
        raise DomainError(f"mixture_log_pmf requires x >= 1, got {x!r}.")
    return float(log_pmf_curve(np.array([x]), spec, params)[0])


def log_survival_curve(
    xs: ArrayLike, spec: MixtureSpec, params: ParamVector
) -> NDArray[np.float64]:
    """log Pr(X >= x) over an integer grid."""
    params.check()
    phi = _require_phi(params)
    x = np.asarray(xs, dtype=np.int64)
    if np.any(x < 1):
        raise DomainError("The mixture is supported on positive integers only.")
    out = np.empty(x.shape, dtype=float)
    in_bulk = x <= params.u
    if np.any(in_bulk):
        fraction = bulk_log_upper_fraction(x[in_bulk], spec.bulk, params.xi1, params.u)
        out[in_bulk] = np.logaddexp(_log(phi), _log(1.0 - phi) + fraction)
    if np.any(~in_bulk):
        out[~in_bulk] = _log(phi) + tail_log_survival(
            x[~in_bulk] - 1.0 - params.u, params.xi2, params.sigma_u
        )
    return out


def mixture_log_survival(x: int, spec: MixtureSpec, params: ParamVector) -> float:
    if x < 1:
        raise DomainError(f"mixture_log_survival requires x >= 1, got {x!r}.")
    return float(log_survival_curve(np.array([x]), spec, params)[0])


def discrete_power_law_log_pmf(x: int, alpha: float, u0: int) -> float:
    if not alpha > 1.0:
        raise DomainError(f"Discrete power law needs alpha > 1, got {alpha!r}.")
    if int(u0) != u0 or u0 < 1:
        raise DomainError(f"Lower cut-off must be a positive integer, got {u0!r}.")
    if x < u0:
        raise DomainError(f"x must be >= u0, got x={x!r}, u0={u0!r}.")
    return -alpha * math.log(x) - math.log(hurwitz_zeta(alpha, u0))


def _ceil_to_int64(values: NDArray[np.float64], floor: int) -> NDArray[np.int64]:
    """Integer ceiling of tail variates, clipped into [floor, INT64_MAX]."""
    ceiled = np.ceil(values)
    # float(INT64_MAX) rounds up to 2**63, which does not fit
    overflow = ~(ceiled < float(INT64_MAX))
    out = np.full(ceiled.shape, INT64_MAX, dtype=np.int64)
    out[~overflow] = ceiled[~overflow].astype(np.int64)
    if overflow.any():
        logger.warning(
            "%d tail draws exceed the int64 range and were clipped to %d.",
            int(overflow.sum()),
            INT64_MAX,
        )
    return np.maximum(out, floor)


def sample_mixture(
    spec: MixtureSpec,
    params: ParamVector,
    n: int,
    seed: int | np.random.Generator | None = None,
) -> NDArray[np.int64]:
    """Draw n variates: truncated bulk by inverse CDF, tail as ceil of a GPD draw."""
    if params.phi_u is None and spec.constrained:
        params = params.with_phi(
            constrained_phi(spec, params.xi1, params.xi2, params.sigma, params.u)
        )
    params.check()
    phi = _require_phi(params)
    if int(n) != n or n < 1:
        raise DomainError(f"Sample size must be a positive integer, got {n!r}.")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    is_tail = rng.random(n) < phi
    bulk_uniforms = rng.random(n)
    tail_uniforms = 1.0 - rng.random(n)

    draws = np.empty(n, dtype=np.int64)
    n_bulk = int(np.count_nonzero(~is_tail))
    if n_bulk:
        support = np.arange(1, params.u + 1)
        log_norm = bulk_log_normalizer(spec.bulk, params.xi1, params.u)
        cdf = np.cumsum(np.exp(bulk_log_mass(support, spec.bulk, params.xi1) - log_norm))
        cdf[-1] = 1.0
        picks = np.searchsorted(cdf, bulk_uniforms[~is_tail], side="right") + 1
        draws[~is_tail] = np.minimum(picks, params.u)
    if n_bulk < n:
        log_v = np.log(tail_uniforms[is_tail])
        if abs(params.xi2) < XI2_EPSILON:
            excess = -params.sigma_u * log_v
        else:
            with np.errstate(over="ignore"):
                excess = params.sigma_u * np.expm1(-params.xi2 * log_v) / params.xi2
        draws[is_tail] = _ceil_to_int64(params.u + excess, params.u + 1)
    return draws
