from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
import logging
import math

import numpy as np
from numpy.typing import NDArray
from scipy.optimize import minimize, minimize_scalar

from tailmix.distributions import (
    BulkKind,
    MixtureSpec,
    ParamVector,
    bulk_log_mass,
    bulk_log_normalizer,
    constrained_phi,
    igpd_log_pmf_array,
)
from tailmix.special_functions import LOG_ZERO, hurwitz_zeta

logger = logging.getLogger(__name__)

DEFAULT_PHI_BOUNDS: tuple[float, float] = (0.005, 0.4)
_LOG_XI1_BOUNDS = (math.log(1e-4), math.log(1e4))
_LOG_XI1_GRID = np.linspace(*_LOG_XI1_BOUNDS, 81)
_OPTIMIZER_TOLERANCE = 1e-8
_TAIL_RESTARTS = 5
_EXTREME_XI2 = 50.0
_POWER_LAW_ALPHA_BOUNDS = (1.0 + 1e-6, 50.0)


class EmptyTableError(ValueError):
    """Raised when a sample holds no positive observations."""


class DegenerateSideError(ValueError):
    """Raised when a threshold leaves no observations on one side."""


class EmptyCandidateError(ValueError):
    """Raised when no threshold satisfies the exceedance-proportion filter."""


@dataclass(frozen=True)
class FrequencyTable:
    """Compressed sample of positive integers; zeros are only counted."""

    values: tuple[int, ...]
    counts: tuple[int, ...]
    zero_count: int = 0

    def __post_init__(self) -> None:
        if len(self.values) != len(self.counts):
            raise ValueError("values and counts must have the same length.")
        if not self.values:
            raise EmptyTableError("The sample contains no positive values.")
        previous = 0
        for value, count in zip(self.values, self.counts):
            if int(value) != value or value <= previous:
                raise ValueError(
                    "Table values must be strictly increasing positive integers."
                )
            if int(count) != count or count < 1:
                raise ValueError(f"Count for value {value} must be a positive integer.")
            previous = value
        if int(self.zero_count) != self.zero_count or self.zero_count < 0:
            raise ValueError("zero_count must be a nonnegative integer.")

    @classmethod
    def from_counts(
        cls, counts: Mapping[int, int], *, zero_count: int = 0
    ) -> "FrequencyTable":
        merged: Counter[int] = Counter()
        zeros = int(zero_count)
        for value, count in counts.items():
            value, count = int(value), int(count)
            if value < 0 or count < 0:
                raise ValueError("Values and counts must be nonnegative integers.")
            if value == 0:
                zeros += count
            elif count > 0:
                merged[value] += count
        ordered = sorted(merged.items())
        return cls(
            values=tuple(value for value, _ in ordered),
            counts=tuple(count for _, count in ordered),
            zero_count=zeros,
        )

    @classmethod
    def from_observations(cls, observations: Iterable[int]) -> "FrequencyTable":
        return cls.from_counts(Counter(int(item) for item in observations))

    @property
    def n(self) -> int:
        return int(sum(self.counts))

    @property
    def min_value(self) -> int:
        return self.values[0]

    @property
    def max_value(self) -> int:
        return self.values[-1]

    @property
    def entries(self) -> tuple[tuple[int, int], ...]:
        return tuple(zip(self.values, self.counts))

    @cached_property
    def value_array(self) -> NDArray[np.int64]:
        return np.asarray(self.values, dtype=np.int64)

    @cached_property
    def count_array(self) -> NDArray[np.float64]:
        return np.asarray(self.counts, dtype=float)

    @cached_property
    def _cumulative(self) -> NDArray[np.int64]:
        return np.concatenate(([0], np.cumsum(np.asarray(self.counts, dtype=np.int64))))

    def split_index(self, u: int) -> int:
        """Number of unique values <= u."""
        return int(np.searchsorted(self.value_array, u, side="right"))

    def exceedance_count(self, u: int) -> int:
        return int(self.n - self._cumulative[self.split_index(u)])

    def exceedance_counts(self, us: NDArray[np.int64]) -> NDArray[np.int64]:
        idx = np.searchsorted(self.value_array, us, side="right")
        return self.n - self._cumulative[idx]

    def quantile(self, q: float) -> int:
        """Smallest value whose empirical CDF reaches q."""
        if not 0.0 < q <= 1.0:
            raise ValueError(f"Quantile level must lie in (0, 1], got {q!r}.")
        target = q * self.n
        idx = int(np.searchsorted(self._cumulative[1:], target - 1e-9, side="left"))
        return self.values[min(idx, len(self.values) - 1)]

    def empirical_survival(self, xs: NDArray[np.int64]) -> NDArray[np.float64]:
        """Pr(X >= x) with zeros excluded."""
        idx = np.searchsorted(self.value_array, np.asarray(xs) - 1, side="right")
        return (self.n - self._cumulative[idx]) / float(self.n)

    def frequencies(self, xs: NDArray[np.int64]) -> NDArray[np.float64]:
        lookup = dict(self.entries)
        return np.array([float(lookup.get(int(x), 0)) for x in xs])

    def expand(self) -> NDArray[np.int64]:
        return np.repeat(self.value_array, np.asarray(self.counts, dtype=np.int64))

    def scaled(self, factor: int) -> "FrequencyTable":
        return FrequencyTable(
            values=self.values,
            counts=tuple(count * int(factor) for count in self.counts),
            zero_count=self.zero_count * int(factor),
        )


@dataclass(frozen=True)
class ComponentFit:
    spec: MixtureSpec
    u: int
    xi1: float
    xi2: float
    sigma: float
    phi_u: float
    loglik: float
    n_bulk: int
    n_tail: int
    flags: tuple[str, ...] = ()

    @property
    def flagged(self) -> bool:
        return bool(self.flags)

    @property
    def params(self) -> ParamVector:
        return ParamVector(
            xi1=self.xi1, xi2=self.xi2, sigma=self.sigma, u=self.u, phi_u=self.phi_u
        )

    def to_json(self) -> dict[str, object]:
        return {
            "u": self.u,
            "xi1": self.xi1,
            "xi2": self.xi2,
            "sigma": self.sigma,
            "phi_u": self.phi_u,
            "loglik": self.loglik,
            "n_bulk": self.n_bulk,
            "n_tail": self.n_tail,
            "flags": list(self.flags),
        }


@dataclass(frozen=True)
class ProfileRow:
    u: int
    loglik: float
    fit: ComponentFit


@dataclass(frozen=True)
class ThresholdProfile:
    spec: MixtureSpec
    rows: tuple[ProfileRow, ...]
    phi_bounds: tuple[float, float] = field(default=DEFAULT_PHI_BOUNDS)

    @property
    def best(self) -> ProfileRow:
        return max(self.rows, key=lambda row: (row.loglik, -row.u))


@dataclass(frozen=True)
class PowerLawFit:
    alpha: float
    u0: int
    n_tail: int
    loglik: float

    def to_json(self) -> dict[str, object]:
        return {"alpha": self.alpha, "u0": self.u0, "n_tail": self.n_tail, "loglik": self.loglik}


# ---------------------------------------------------------------------------
# likelihood


def mle_exceedance(table: FrequencyTable, u: int) -> float:
    """Empirical proportion of observations strictly above u."""
    return table.exceedance_count(u) / float(table.n)


def resolve_phi(table: FrequencyTable, spec: MixtureSpec, params: ParamVector) -> float:
    if spec.constrained:
        return constrained_phi(spec, params.xi1, params.xi2, params.sigma, params.u)
    return mle_exceedance(table, params.u)


def _bulk_loglik(
    bulk: BulkKind, xi1: float, u: int, values: NDArray[np.int64], counts: NDArray[np.float64]
) -> float:
    if values.size == 0:
        return 0.0
    log_mass = bulk_log_mass(values, bulk, xi1)
    return float(np.dot(counts, log_mass) - counts.sum() * bulk_log_normalizer(bulk, xi1, u))


def _tail_loglik(
    xi2: float, sigma: float, u: int, values: NDArray[np.int64], counts: NDArray[np.float64]
) -> float:
    if values.size == 0:
        return 0.0
    sigma_u = sigma + xi2 * u
    if not (sigma > 0.0 and sigma_u > 0.0):
        return LOG_ZERO
    log_mass = igpd_log_pmf_array(values, u, xi2, sigma_u)
    if np.any(np.isneginf(log_mass)):
        return LOG_ZERO
    return float(np.dot(counts, log_mass))


def _phi_loglik(phi: float, n_bulk: float, n_tail: float) -> float:
    total = 0.0
    if n_bulk > 0:
        total += n_bulk * math.log(1.0 - phi) if phi < 1.0 else LOG_ZERO
    if n_tail > 0:
        total += n_tail * math.log(phi) if phi > 0.0 else LOG_ZERO
    return total


def log_likelihood(table: FrequencyTable, spec: MixtureSpec, params: ParamVector) -> float:
    """Mixture log-likelihood over unique values, weighted by multiplicity.

    Out-of-support parameters and observations with zero mass yield -inf.
    """
    if not params.is_valid():
        return LOG_ZERO
    phi = params.phi_u if params.phi_u is not None else resolve_phi(table, spec, params)
    if not 0.0 <= phi <= 1.0:
        return LOG_ZERO
    idx = table.split_index(params.u)
    values, counts = table.value_array, table.count_array
    total = _phi_loglik(phi, counts[:idx].sum(), counts[idx:].sum())
    if total == LOG_ZERO:
        return LOG_ZERO
    total += _bulk_loglik(spec.bulk, params.xi1, params.u, values[:idx], counts[:idx])
    total += _tail_loglik(params.xi2, params.sigma, params.u, values[idx:], counts[idx:])
    if math.isnan(total):
        return LOG_ZERO
    return total


# ---------------------------------------------------------------------------
# maximum likelihood


def mle_bulk(table: FrequencyTable, bulk: BulkKind, u: int) -> tuple[float, float, bool]:
    """Maximise the bulk product at fixed u; returns (xi1, loglik, at_boundary)."""
    idx = table.split_index(u)
    if idx == 0:
        raise DegenerateSideError(f"No observations at or below u={u}.")
    values, counts = table.value_array[:idx], table.count_array[:idx]

    def negative(log_xi1: float) -> float:
        value = _bulk_loglik(bulk, math.exp(log_xi1), u, values, counts)
        return -value if math.isfinite(value) else math.inf

    scores = np.array([negative(point) for point in _LOG_XI1_GRID])
    best = int(np.argmin(scores))
    lo = _LOG_XI1_GRID[max(best - 1, 0)]
    hi = _LOG_XI1_GRID[min(best + 1, _LOG_XI1_GRID.size - 1)]
    result = minimize_scalar(
        negative, bounds=(lo, hi), method="bounded", options={"xatol": _OPTIMIZER_TOLERANCE}
    )
    log_xi1 = float(result.x) if result.fun <= scores[best] else float(_LOG_XI1_GRID[best])
    at_boundary = (
        abs(log_xi1 - _LOG_XI1_BOUNDS[0]) < 1e-3 or abs(log_xi1 - _LOG_XI1_BOUNDS[1]) < 1e-3
    )
    return math.exp(log_xi1), -negative(log_xi1), at_boundary


def mle_tail(
    table: FrequencyTable,
    u: int,
    *,
    restarts: int = _TAIL_RESTARTS,
    seed: int = 0,
) -> tuple[float, float, float]:
    """Maximise the IGPD product at fixed u; returns (xi2, sigma, loglik)."""
    idx = table.split_index(u)
    if idx == len(table.values):
        raise DegenerateSideError(f"No observations above u={u}.")
    values, counts = table.value_array[idx:], table.count_array[idx:]

    def negative(theta: NDArray[np.float64]) -> float:
        value = _tail_loglik(float(theta[0]), math.exp(theta[1]), u, values, counts)
        return -value if math.isfinite(value) else math.inf

    mean_excess = float(np.dot(counts, values - u) / counts.sum())
    xi_start = 0.1
    sigma_start = mean_excess * (1.0 - xi_start) - xi_start * u
    if sigma_start <= 0.0:
        xi_start, sigma_start = 0.0, mean_excess
    origin = np.array([xi_start, math.log(sigma_start)])

    rng = np.random.default_rng(seed)
    starts = [origin]
    attempts = 0
    while len(starts) < max(1, restarts) and attempts < 100 * restarts:
        attempts += 1
        candidate = origin + rng.normal(0.0, [0.3, 1.0])
        if math.isfinite(negative(candidate)):
            starts.append(candidate)

    best: tuple[float, NDArray[np.float64]] | None = None
    for start in starts:
        result = minimize(
            negative,
            start,
            method="Nelder-Mead",
            options={
                "xatol": _OPTIMIZER_TOLERANCE,
                "fatol": _OPTIMIZER_TOLERANCE,
                "maxiter": 4000,
            },
        )
        if best is None or result.fun < best[0]:
            best = (float(result.fun), np.asarray(result.x, dtype=float))
    assert best is not None
    fun, theta = best
    return float(theta[0]), math.exp(theta[1]), -fun


def _refine_constrained(
    table: FrequencyTable, spec: MixtureSpec, start: ParamVector
) -> ParamVector:
    def negative(theta: NDArray[np.float64]) -> float:
        candidate = ParamVector(
            xi1=math.exp(theta[0]), xi2=float(theta[1]), sigma=math.exp(theta[2]), u=start.u
        )
        if not candidate.is_valid():
            return math.inf
        value = log_likelihood(table, spec, candidate)
        return -value if math.isfinite(value) else math.inf

    origin = np.array([math.log(start.xi1), start.xi2, math.log(start.sigma)])
    result = minimize(
        negative,
        origin,
        method="Nelder-Mead",
        options={"xatol": _OPTIMIZER_TOLERANCE, "fatol": _OPTIMIZER_TOLERANCE, "maxiter": 6000},
    )
    if not result.fun < negative(origin):
        return start
    return ParamVector(
        xi1=math.exp(result.x[0]), xi2=float(result.x[1]), sigma=math.exp(result.x[2]), u=start.u
    )


def mle_components(
    table: FrequencyTable,
    spec: MixtureSpec,
    u: int,
    *,
    seed: int = 0,
    refine_constrained: bool = True,
) -> ComponentFit:
    """Componentwise MLE at a fixed threshold.

    The bulk and tail products are maximised separately. Under the
    constrained mode the estimates are then refined jointly, since phi_u
    couples all parameters there.
    """
    idx = table.split_index(u)
    n_bulk = int(table.count_array[:idx].sum())
    n_tail = table.n - n_bulk
    if n_bulk == 0 or n_tail == 0:
        side = "at or below" if n_bulk == 0 else "above"
        raise DegenerateSideError(f"No observations {side} u={u}; parameters undefined.")

    flags: list[str] = []
    xi1, _, at_boundary = mle_bulk(table, spec.bulk, u)
    if at_boundary:
        flags.append("xi1_at_search_boundary")
    xi2, sigma, _ = mle_tail(table, u, seed=seed)
    if len(table.values) - idx < 2:
        flags.append("single_unique_exceedance")
    if abs(xi2) > _EXTREME_XI2:
        flags.append("xi2_extreme")

    params = ParamVector(xi1=xi1, xi2=xi2, sigma=sigma, u=u)
    if spec.constrained and refine_constrained:
        params = _refine_constrained(table, spec, params)
    phi = resolve_phi(table, spec, params)
    params = params.with_phi(phi)
    return ComponentFit(
        spec=spec,
        u=u,
        xi1=params.xi1,
        xi2=params.xi2,
        sigma=params.sigma,
        phi_u=phi,
        loglik=log_likelihood(table, spec, params),
        n_bulk=n_bulk,
        n_tail=n_tail,
        flags=tuple(flags),
    )


def candidate_thresholds(
    table: FrequencyTable, phi_bounds: tuple[float, float] = DEFAULT_PHI_BOUNDS
) -> list[int]:
    """Integer thresholds whose empirical exceedance proportion is in phi_bounds."""
    lo, hi = phi_bounds
    us = np.arange(table.min_value, table.max_value + 1, dtype=np.int64)
    proportions = table.exceedance_counts(us) / float(table.n)
    keep = (proportions >= lo) & (proportions <= hi)
    return [int(u) for u in us[keep]]


def profile_threshold(
    table: FrequencyTable,
    spec: MixtureSpec,
    phi_bounds: tuple[float, float] = DEFAULT_PHI_BOUNDS,
    *,
    max_workers: int | None = None,
    seed: int = 0,
) -> ThresholdProfile:
    """Profile log-likelihood over every admissible integer threshold."""
    candidates = candidate_thresholds(table, phi_bounds)
    if not candidates:
        raise EmptyCandidateError(
            f"No threshold has an exceedance proportion within {phi_bounds}."
        )
    logger.info("profiling %d candidate thresholds for %s", len(candidates), spec.label)

    def fit_one(u: int) -> ComponentFit | None:
        try:
            return mle_components(table, spec, u, seed=seed)
        except DegenerateSideError:
            return None

    workers = max(1, min(int(max_workers or 8), len(candidates)))
    if workers == 1:
        fits = [fit_one(u) for u in candidates]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            fits = list(executor.map(fit_one, candidates))

    rows = tuple(
        ProfileRow(u=fit.u, loglik=fit.loglik, fit=fit) for fit in fits if fit is not None
    )
    if not rows:
        raise EmptyCandidateError("Every candidate threshold left one side empty.")
    return ThresholdProfile(spec=spec, rows=rows, phi_bounds=tuple(phi_bounds))


def fit_discrete_power_law(
    table: FrequencyTable, u0: int | None = None, *, quantile: float = 0.95
) -> PowerLawFit:
    """MLE of the discrete power law on observations >= u0."""
    cutoff = int(u0) if u0 is not None else table.quantile(quantile)
    if cutoff < 1:
        raise ValueError(f"Lower cut-off must be a positive integer, got {cutoff}.")
    start = int(np.searchsorted(table.value_array, cutoff, side="left"))
    values, counts = table.value_array[start:], table.count_array[start:]
    if values.size == 0:
        raise DegenerateSideError(f"No observations at or above u0={cutoff}.")
    n_tail = float(counts.sum())
    log_sum = float(np.dot(counts, np.log(values)))

    def negative(alpha: float) -> float:
        return alpha * log_sum + n_tail * math.log(hurwitz_zeta(alpha, cutoff))

    result = minimize_scalar(
        negative,
        bounds=_POWER_LAW_ALPHA_BOUNDS,
        method="bounded",
        options={"xatol": _OPTIMIZER_TOLERANCE},
    )
    return PowerLawFit(
        alpha=float(result.x), u0=cutoff, n_tail=int(n_tail), loglik=-float(result.fun)
    )
