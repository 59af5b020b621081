"""Posterior summaries and goodness-of-fit on top of a sampler trace."""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
import logging
import math

import numpy as np
from numpy.typing import ArrayLike, NDArray

from tailmix.distributions import MixtureSpec, ParamVector, log_pmf_curve, log_survival_curve
from tailmix.likelihood import DEFAULT_PHI_BOUNDS, FrequencyTable, PowerLawFit
from tailmix.sampler import DegenerateTraceError, Trace
from tailmix.special_functions import hurwitz_zeta

logger = logging.getLogger(__name__)

SUMMARY_QUANTILES: tuple[float, ...] = (0.005, 0.025, 0.5, 0.975, 0.995)
_BAND_CHUNK = 2048


def split_by_model(trace: Trace) -> tuple[Trace, Trace]:
    """Return (constrained rows, unconstrained rows), order preserved."""
    constrained = trace.model == 1
    return trace.select(constrained), trace.select(~constrained)


def _require_rows(trace: Trace, what: str) -> None:
    if len(trace) == 0:
        raise DegenerateTraceError(f"{what} needs a nonempty trace.")


# ---------------------------------------------------------------------------
# bands


@dataclass(frozen=True, eq=False)
class SurvivalBand:
    x: NDArray[np.int64]
    empirical: NDArray[np.float64]
    lower: NDArray[np.float64]
    median: NDArray[np.float64]
    upper: NDArray[np.float64]
    level: float

    def coverage(self) -> float:
        """Share of grid points whose empirical value lies inside the band."""
        inside = (self.empirical >= self.lower) & (self.empirical <= self.upper)
        return float(np.mean(inside))


@dataclass(frozen=True, eq=False)
class FrequencyBand(SurvivalBand):
    """Band of fitted frequencies n*p(x) against observed counts."""


def _quantile_band(
    trace: Trace,
    xs: NDArray[np.int64],
    level: float,
    evaluate: Callable[[NDArray[np.int64], ParamVector], NDArray[np.float64]],
) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
    if not 0.0 < level < 1.0:
        raise ValueError(f"Band level must lie in (0, 1), got {level!r}.")
    tail = (1.0 - level) / 2.0
    probabilities = [tail, 0.5, 1.0 - tail]
    lower = np.empty(xs.size)
    median = np.empty(xs.size)
    upper = np.empty(xs.size)
    params = [trace.params_at(index) for index in range(len(trace))]
    for start in range(0, xs.size, _BAND_CHUNK):
        chunk = xs[start : start + _BAND_CHUNK]
        curves = np.vstack([evaluate(chunk, item) for item in params])
        lo, mid, hi = np.quantile(curves, probabilities, axis=0)
        lower[start : start + chunk.size] = lo
        median[start : start + chunk.size] = mid
        upper[start : start + chunk.size] = hi
    return lower, median, upper


def survival_band(
    trace: Trace, table: FrequencyTable, spec: MixtureSpec, level: float = 0.99
) -> SurvivalBand:
    """Pointwise posterior quantiles of Pr(X >= x) for x in [1, max(data)]."""
    _require_rows(trace, "survival_band")
    xs = np.arange(1, table.max_value + 1, dtype=np.int64)

    def evaluate(chunk: NDArray[np.int64], params: ParamVector) -> NDArray[np.float64]:
        return np.exp(log_survival_curve(chunk, spec, params))

    lower, median, upper = _quantile_band(trace, xs, level, evaluate)
    return SurvivalBand(
        x=xs,
        empirical=table.empirical_survival(xs),
        lower=np.clip(lower, 0.0, 1.0),
        median=np.clip(median, 0.0, 1.0),
        upper=np.clip(upper, 0.0, 1.0),
        level=level,
    )


def frequency_band(
    trace: Trace, table: FrequencyTable, spec: MixtureSpec, level: float = 0.99
) -> FrequencyBand:
    _require_rows(trace, "frequency_band")
    xs = np.arange(1, table.max_value + 1, dtype=np.int64)
    n = float(table.n)

    def evaluate(chunk: NDArray[np.int64], params: ParamVector) -> NDArray[np.float64]:
        return n * np.exp(log_pmf_curve(chunk, spec, params))

    lower, median, upper = _quantile_band(trace, xs, level, evaluate)
    return FrequencyBand(
        x=xs,
        empirical=table.frequencies(xs),
        lower=lower,
        median=median,
        upper=upper,
        level=level,
    )


@dataclass(frozen=True, eq=False)
class BaselineCurve:
    """Survival of a discrete power law fitted above a fixed cut-off."""

    x: NDArray[np.int64]
    survival: NDArray[np.float64]
    alpha: float
    u0: int


def baseline_power_law_curve(table: FrequencyTable, fit: PowerLawFit) -> BaselineCurve:
    """Pr(X >= x) for x in [u0, max(data)], scaled by the share of data >= u0."""
    xs = np.arange(fit.u0, table.max_value + 1, dtype=np.int64)
    # zeta(alpha, x) = zeta(alpha, max) + sum_{k=x}^{max-1} k^-alpha, summed upward
    terms = np.power(xs[:-1].astype(float), -fit.alpha)
    head = np.cumsum(terms[::-1])[::-1]
    zeta_values = hurwitz_zeta(fit.alpha, table.max_value) + np.append(head, 0.0)
    share = fit.n_tail / float(table.n)
    return BaselineCurve(
        x=xs,
        survival=share * zeta_values / zeta_values[0],
        alpha=fit.alpha,
        u0=fit.u0,
    )


# ---------------------------------------------------------------------------
# goodness of fit


@dataclass(frozen=True)
class KsResult:
    statistic: float
    argmax_x: int
    mode_index: int

    def to_json(self) -> dict[str, object]:
        return {"ks": self.statistic, "x": self.argmax_x, "mode_index": self.mode_index}


def ks_statistic(trace: Trace, table: FrequencyTable, spec: MixtureSpec) -> KsResult:
    """KS distance between empirical and fitted survival at the best trace row."""
    _require_rows(trace, "ks_statistic")
    mode_index = int(np.argmax(trace.log_post))
    params = trace.params_at(mode_index)
    xs = np.arange(1, table.max_value + 1, dtype=np.int64)
    fitted = np.exp(log_survival_curve(xs, spec, params))
    gaps = np.abs(table.empirical_survival(xs) - fitted)
    worst = int(np.argmax(gaps))
    return KsResult(statistic=float(gaps[worst]), argmax_x=int(xs[worst]), mode_index=mode_index)


# ---------------------------------------------------------------------------
# parameter posteriors


def exponent_from_shape(xi: ArrayLike) -> NDArray[np.float64]:
    return 1.0 / np.asarray(xi, dtype=float) + 1.0


def shape_from_exponent(alpha: ArrayLike) -> NDArray[np.float64]:
    return 1.0 / (np.asarray(alpha, dtype=float) - 1.0)


@dataclass(frozen=True, eq=False)
class ExponentPosterior:
    alpha1: NDArray[np.float64]
    alpha2: NDArray[np.float64]
    n_nonpositive_xi2: int

    def summary(self) -> dict[str, dict[str, float]]:
        out: dict[str, dict[str, float]] = {}
        for name, values in (("alpha1", self.alpha1), ("alpha2", self.alpha2)):
            summary = _summarize(values)
            out[name] = {"mean": summary.mean, "sd": summary.sd}
        return out


def exponent_posterior(trace: Trace) -> ExponentPosterior:
    """Power-law exponents implied by the sampled shapes; xi2 <= 0 rows give no alpha2."""
    _require_rows(trace, "exponent_posterior")
    positive = trace.xi2 > 0.0
    dropped = int(np.count_nonzero(~positive))
    if dropped:
        logger.info("%d of %d rows have xi2 <= 0 and no tail exponent", dropped, len(trace))
    return ExponentPosterior(
        alpha1=exponent_from_shape(trace.xi1),
        alpha2=exponent_from_shape(trace.xi2[positive]),
        n_nonpositive_xi2=dropped,
    )


@dataclass(frozen=True)
class ParameterSummary:
    mean: float
    sd: float
    quantiles: dict[str, float]

    def to_json(self) -> dict[str, object]:
        return {"mean": self.mean, "sd": self.sd, "quantiles": dict(self.quantiles)}


def _summarize(values: NDArray[np.float64]) -> ParameterSummary:
    labels = [f"q{q * 100:g}" for q in SUMMARY_QUANTILES]
    if values.size == 0:
        return ParameterSummary(math.nan, math.nan, dict.fromkeys(labels, math.nan))
    quantiles = np.quantile(values, SUMMARY_QUANTILES)
    return ParameterSummary(
        mean=float(values.mean()),
        sd=float(values.std(ddof=1)) if values.size > 1 else 0.0,
        quantiles={label: float(value) for label, value in zip(labels, quantiles)},
    )


def parameter_summary(trace: Trace) -> dict[str, ParameterSummary]:
    _require_rows(trace, "parameter_summary")
    exponents = exponent_posterior(trace)
    columns = {
        "xi1": trace.xi1,
        "xi2": trace.xi2,
        "sigma": trace.sigma,
        "u": trace.u.astype(float),
        "phi_u": trace.phi_u,
        "alpha1": exponents.alpha1,
        "alpha2": exponents.alpha2,
    }
    return {name: _summarize(np.asarray(values, dtype=float)) for name, values in columns.items()}


@dataclass(frozen=True, eq=False)
class ThresholdPosterior:
    u: NDArray[np.int64]
    probability: NDArray[np.float64]
    max_log_post: NDArray[np.float64]
    mean_log_post: NDArray[np.float64]

    @property
    def modes(self) -> tuple[int, ...]:
        peak = self.probability.max()
        return tuple(int(u) for u, p in zip(self.u, self.probability) if p == peak)

    def to_json(self) -> dict[str, object]:
        return {
            "u": self.u.tolist(),
            "probability": self.probability.tolist(),
            "max_log_post": self.max_log_post.tolist(),
            "mean_log_post": self.mean_log_post.tolist(),
            "modes": list(self.modes),
        }


def threshold_posterior(trace: Trace) -> ThresholdPosterior:
    """Posterior PMF of u with per-u best and mean log-posterior."""
    _require_rows(trace, "threshold_posterior")
    values, inverse, counts = np.unique(trace.u, return_inverse=True, return_counts=True)
    best = np.full(values.size, -np.inf)
    np.maximum.at(best, inverse, trace.log_post)
    totals = np.bincount(inverse, weights=trace.log_post, minlength=values.size)
    return ThresholdPosterior(
        u=values.astype(np.int64),
        probability=counts / float(len(trace)),
        max_log_post=best,
        mean_log_post=totals / counts,
    )


def phi_unique_count(trace: Trace) -> int:
    return int(np.unique(trace.phi_u).size)


# ---------------------------------------------------------------------------
# data


@dataclass(frozen=True)
class DataDiagnostics:
    n: int
    zero_count: int
    zero_proportion: float
    proportion_le_2: float
    unique_values: int
    max_value: int
    phi_bounds: tuple[float, float]
    phi_grid_size: int

    def to_json(self) -> dict[str, object]:
        return {
            "n": self.n,
            "zero_count": self.zero_count,
            "zero_proportion": self.zero_proportion,
            "proportion_le_2": self.proportion_le_2,
            "unique_values": self.unique_values,
            "max_value": self.max_value,
            "phi_bounds": list(self.phi_bounds),
            "phi_grid_size": self.phi_grid_size,
        }


def data_diagnostics(
    table: FrequencyTable, phi_bounds: tuple[float, float] = DEFAULT_PHI_BOUNDS
) -> DataDiagnostics:
    """Summary of a sample; proportions exclude zeros except zero_proportion."""
    lo, hi = phi_bounds
    n = table.n
    # exceedance counts achievable by an integer threshold at or above min(data)
    achievable = table.exceedance_counts(table.value_array) / float(n)
    admissible = (achievable >= lo) & (achievable <= hi)
    return DataDiagnostics(
        n=n,
        zero_count=table.zero_count,
        zero_proportion=table.zero_count / float(n + table.zero_count),
        proportion_le_2=1.0 - table.exceedance_count(2) / float(n),
        unique_values=len(table.values),
        max_value=table.max_value,
        phi_bounds=(float(lo), float(hi)),
        phi_grid_size=int(np.unique(achievable[admissible]).size),
    )
