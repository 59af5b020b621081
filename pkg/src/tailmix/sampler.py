"""Metropolis-within-Gibbs sampling over (xi1, xi2, sigma, u, M).

Each sweep updates log(xi1), then (xi2, log sigma) jointly, then the
integer threshold u, then flips the model indicator M between the
constrained (M=1) and unconstrained (M=0) variants. Both variants share
the same parameter vector, so the flip is an ordinary Metropolis step.
"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum
import logging
import math

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln

from tailmix.distributions import BulkKind, MixtureSpec, ParamVector
from tailmix.likelihood import (
    EmptyCandidateError,
    FrequencyTable,
    log_likelihood,
    profile_threshold,
    resolve_phi,
)
from tailmix.special_functions import LOG_ZERO

logger = logging.getLogger(__name__)

TRACE_COLUMNS: tuple[str, ...] = ("iter", "M", "xi1", "xi2", "sigma", "u", "phi_u", "log_post")
BLOCKS: tuple[str, ...] = ("xi1", "tail", "u", "model")
_LOG_2PI = math.log(2.0 * math.pi)
_INIT_JITTER = 0.10
_INIT_ATTEMPTS = 200


class ChainInitializationError(RuntimeError):
    """Raised when no starting point with finite posterior is found."""


class DegenerateTraceError(ValueError):
    """Raised when a trace lacks the rows an estimate needs."""


class ConstraintMode(str, Enum):
    BOTH = "both"
    CONSTRAINED = "constrained"
    UNCONSTRAINED = "unconstrained"

    @classmethod
    def parse(cls, value: "str | ConstraintMode") -> "ConstraintMode":
        if isinstance(value, ConstraintMode):
            return value
        normalized = str(value).strip().lower().replace("_", "-")
        aliases = {
            "both": cls.BOTH,
            "constrained": cls.CONSTRAINED,
            "constrained-only": cls.CONSTRAINED,
            "unconstrained": cls.UNCONSTRAINED,
            "unconstrained-only": cls.UNCONSTRAINED,
        }
        if normalized not in aliases:
            raise ValueError(f"Unknown constraint mode: {value!r}.")
        return aliases[normalized]

    @property
    def fixed_model(self) -> int | None:
        if self is ConstraintMode.CONSTRAINED:
            return 1
        if self is ConstraintMode.UNCONSTRAINED:
            return 0
        return None


@dataclass(frozen=True)
class PriorSpec:
    xi1_lo: float = 0.0
    xi1_hi: float = 100.0
    xi2_mean: float = 0.0
    xi2_sd: float = 30.0
    sigma_shape: float = 1.0
    sigma_scale: float = 0.01
    phi_lo: float = 0.005
    phi_hi: float = 0.4
    prior_m1: float = 0.5
    # "scale" reads sigma_scale as a Gamma scale, "rate" as a rate
    sigma_param: str = "scale"

    def __post_init__(self) -> None:
        if not (self.xi1_lo >= 0.0 and self.xi1_hi > self.xi1_lo):
            raise ValueError("xi1 prior needs 0 <= xi1_lo < xi1_hi.")
        if not self.xi2_sd > 0.0:
            raise ValueError("xi2_sd must be positive.")
        if not (self.sigma_shape > 0.0 and self.sigma_scale > 0.0):
            raise ValueError("sigma_shape and sigma_scale must be positive.")
        if not 0.0 <= self.phi_lo < self.phi_hi <= 1.0:
            raise ValueError("phi prior needs 0 <= phi_lo < phi_hi <= 1.")
        if not 0.0 <= self.prior_m1 <= 1.0:
            raise ValueError("prior_m1 must lie in [0, 1].")
        if self.sigma_param not in {"scale", "rate"}:
            raise ValueError("sigma_param must be 'scale' or 'rate'.")

    @property
    def phi_bounds(self) -> tuple[float, float]:
        return (self.phi_lo, self.phi_hi)

    @property
    def sigma_rate(self) -> float:
        return 1.0 / self.sigma_scale if self.sigma_param == "scale" else self.sigma_scale

    def log_density(self, xi1: float, xi2: float, sigma: float, phi_u: float) -> float:
        if not (self.xi1_lo < xi1 < self.xi1_hi):
            return LOG_ZERO
        if not (sigma > 0.0 and self.phi_lo <= phi_u <= self.phi_hi):
            return LOG_ZERO
        rate = self.sigma_rate
        z = (xi2 - self.xi2_mean) / self.xi2_sd
        return (
            -math.log(self.xi1_hi - self.xi1_lo)
            - 0.5 * (_LOG_2PI + z * z)
            - math.log(self.xi2_sd)
            + self.sigma_shape * math.log(rate)
            - float(gammaln(self.sigma_shape))
            + (self.sigma_shape - 1.0) * math.log(sigma)
            - rate * sigma
            - math.log(self.phi_hi - self.phi_lo)
        )

    def log_model_prior(self, model: int) -> float:
        probability = self.prior_m1 if model == 1 else 1.0 - self.prior_m1
        return math.log(probability) if probability > 0.0 else LOG_ZERO

    def with_overrides(self, overrides: Mapping[str, object]) -> "PriorSpec":
        known = {item.name for item in fields(self)}
        updates: dict[str, object] = {}
        for name, raw in overrides.items():
            if name not in known:
                raise ValueError(f"Unknown prior field: {name!r}.")
            updates[name] = str(raw).strip() if name == "sigma_param" else float(raw)
        return replace(self, **updates)

    def to_json(self) -> dict[str, object]:
        return asdict(self)


@dataclass(frozen=True)
class McmcConfig:
    iterations: int = 2_020_000
    burn_in: int = 20_000
    thin: int = 100
    seed: int | np.random.SeedSequence | None = None
    xi1_step: float = 0.1
    xi2_step: float = 0.05
    log_sigma_step: float = 0.1
    u_step: int = 1
    adapt: bool = True
    target_acceptance: float = 0.25
    frozen_blocks: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if self.iterations < 1 or self.thin < 1:
            raise ValueError("iterations and thin must be positive integers.")
        if not 0 <= self.burn_in < self.iterations:
            raise ValueError("burn_in must satisfy 0 <= burn_in < iterations.")
        if self.u_step < 1:
            raise ValueError("u_step must be a positive integer.")
        if min(self.xi1_step, self.xi2_step, self.log_sigma_step) < 0.0:
            raise ValueError("Proposal scales must be nonnegative.")
        unknown = set(self.frozen_blocks) - set(BLOCKS)
        if unknown:
            raise ValueError(f"Unknown sampler blocks: {sorted(unknown)}.")

    @property
    def n_samples(self) -> int:
        return (self.iterations - self.burn_in) // self.thin


@dataclass
class ChainState:
    bulk: BulkKind
    model: int
    xi1: float
    xi2: float
    sigma: float
    u: int
    phi_u: float = math.nan
    log_post: float = LOG_ZERO

    @property
    def spec(self) -> MixtureSpec:
        return MixtureSpec(bulk=self.bulk, constrained=bool(self.model))

    @property
    def params(self) -> ParamVector:
        return ParamVector(xi1=self.xi1, xi2=self.xi2, sigma=self.sigma, u=self.u)


@dataclass
class ProposalScales:
    """Log multipliers on the base proposal scales, adapted during burn-in."""

    log_xi1: float = 0.0
    log_tail: float = 0.0


@dataclass
class BlockStats:
    proposed: dict[str, int] = field(default_factory=lambda: dict.fromkeys(BLOCKS, 0))
    accepted: dict[str, int] = field(default_factory=lambda: dict.fromkeys(BLOCKS, 0))

    def record(self, block: str, accepted: bool) -> None:
        self.proposed[block] += 1
        self.accepted[block] += int(accepted)

    def rates(self) -> dict[str, float]:
        return {
            block: self.accepted[block] / self.proposed[block]
            for block in BLOCKS
            if self.proposed[block]
        }


@dataclass(frozen=True)
class ChainDiagnostics:
    acceptance: dict[str, float]
    xi1_step: float
    xi2_step: float
    log_sigma_step: float

    def to_json(self) -> dict[str, object]:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Trace:
    iteration: NDArray[np.int64]
    model: NDArray[np.int64]
    xi1: NDArray[np.float64]
    xi2: NDArray[np.float64]
    sigma: NDArray[np.float64]
    u: NDArray[np.int64]
    phi_u: NDArray[np.float64]
    log_post: NDArray[np.float64]
    diagnostics: tuple[ChainDiagnostics, ...] = ()

    def __len__(self) -> int:
        return int(self.model.size)

    @classmethod
    def from_rows(
        cls,
        rows: Sequence[Sequence[float]],
        diagnostics: tuple[ChainDiagnostics, ...] = (),
    ) -> "Trace":
        """Build from (iter, M, xi1, xi2, sigma, u, phi_u, log_post) rows."""
        table = np.asarray(rows, dtype=float).reshape(-1, len(TRACE_COLUMNS))
        return cls(
            iteration=table[:, 0].astype(np.int64),
            model=table[:, 1].astype(np.int64),
            xi1=table[:, 2].copy(),
            xi2=table[:, 3].copy(),
            sigma=table[:, 4].copy(),
            u=table[:, 5].astype(np.int64),
            phi_u=table[:, 6].copy(),
            log_post=table[:, 7].copy(),
            diagnostics=diagnostics,
        )

    @classmethod
    def concatenate(cls, traces: Sequence["Trace"]) -> "Trace":
        if not traces:
            return cls.from_rows([])
        return cls(
            iteration=np.concatenate([item.iteration for item in traces]),
            model=np.concatenate([item.model for item in traces]),
            xi1=np.concatenate([item.xi1 for item in traces]),
            xi2=np.concatenate([item.xi2 for item in traces]),
            sigma=np.concatenate([item.sigma for item in traces]),
            u=np.concatenate([item.u for item in traces]),
            phi_u=np.concatenate([item.phi_u for item in traces]),
            log_post=np.concatenate([item.log_post for item in traces]),
            diagnostics=tuple(diag for item in traces for diag in item.diagnostics),
        )

    def select(self, mask: NDArray[np.bool_]) -> "Trace":
        return Trace(
            iteration=self.iteration[mask],
            model=self.model[mask],
            xi1=self.xi1[mask],
            xi2=self.xi2[mask],
            sigma=self.sigma[mask],
            u=self.u[mask],
            phi_u=self.phi_u[mask],
            log_post=self.log_post[mask],
            diagnostics=self.diagnostics,
        )

    def params_at(self, index: int) -> ParamVector:
        return ParamVector(
            xi1=float(self.xi1[index]),
            xi2=float(self.xi2[index]),
            sigma=float(self.sigma[index]),
            u=int(self.u[index]),
            phi_u=float(self.phi_u[index]),
        )

    def columns(self) -> dict[str, NDArray]:
        return {
            "iter": self.iteration,
            "M": self.model,
            "xi1": self.xi1,
            "xi2": self.xi2,
            "sigma": self.sigma,
            "u": self.u,
            "phi_u": self.phi_u,
            "log_post": self.log_post,
        }


@dataclass(frozen=True)
class BayesFactor:
    value: float
    n_unconstrained: int
    n_constrained: int
    bound: str | None = None

    def to_json(self) -> dict[str, object]:
        return asdict(self)


# ---------------------------------------------------------------------------
# posterior


def _evaluate(
    table: FrequencyTable, spec: MixtureSpec, params: ParamVector, priors: PriorSpec
) -> tuple[float, float]:
    if not params.is_valid():
        return LOG_ZERO, math.nan
    phi = resolve_phi(table, spec, params)
    log_prior = priors.log_density(params.xi1, params.xi2, params.sigma, phi)
    if log_prior == LOG_ZERO:
        return LOG_ZERO, phi
    return log_prior + log_likelihood(table, spec, params.with_phi(phi)), phi


def log_posterior(
    table: FrequencyTable, spec: MixtureSpec, params: ParamVector, priors: PriorSpec
) -> float:
    """Unnormalised log-posterior of (xi1, xi2, sigma, u) under model spec.

    phi_u is resolved from the model: continuity constraint for M=1, the
    empirical exceedance proportion for M=0. Any supplied phi_u is ignored.
    """
    return _evaluate(table, spec, params, priors)[0]


def _accept(log_ratio: float, rng: np.random.Generator) -> bool:
    if log_ratio >= 0.0:
        return True
    if log_ratio == LOG_ZERO or math.isnan(log_ratio):
        return False
    return math.log(rng.random()) < log_ratio


def _acceptance_probability(log_ratio: float) -> float:
    if math.isnan(log_ratio):
        return 0.0
    return math.exp(min(0.0, log_ratio))


def _try_move(
    state: ChainState,
    table: FrequencyTable,
    priors: PriorSpec,
    rng: np.random.Generator,
    *,
    xi1: float | None = None,
    xi2: float | None = None,
    sigma: float | None = None,
    u: int | None = None,
    log_jacobian: float = 0.0,
) -> tuple[ChainState, float, bool]:
    proposal = ParamVector(
        xi1=state.xi1 if xi1 is None else xi1,
        xi2=state.xi2 if xi2 is None else xi2,
        sigma=state.sigma if sigma is None else sigma,
        u=state.u if u is None else u,
    )
    log_post, phi = _evaluate(table, state.spec, proposal, priors)
    log_ratio = log_post - state.log_post + log_jacobian
    if log_post == LOG_ZERO:
        log_ratio = LOG_ZERO
    accepted = _accept(log_ratio, rng)
    if accepted:
        state = replace(
            state,
            xi1=proposal.xi1,
            xi2=proposal.xi2,
            sigma=proposal.sigma,
            u=proposal.u,
            phi_u=phi,
            log_post=log_post,
        )
    return state, _acceptance_probability(log_ratio), accepted


def gibbs_sweep(
    state: ChainState,
    table: FrequencyTable,
    priors: PriorSpec,
    config: McmcConfig,
    rng: np.random.Generator,
    *,
    scales: ProposalScales | None = None,
    stats: BlockStats | None = None,
    adapt_rate: float | None = None,
    flip_model: bool = True,
) -> ChainState:
    """One Metropolis-within-Gibbs sweep; each block has its own accept step."""
    if not math.isfinite(state.log_post):
        raise ChainInitializationError("gibbs_sweep needs a state with finite log-posterior.")
    scales = scales or ProposalScales()
    frozen = config.frozen_blocks

    if "xi1" not in frozen:
        step = config.xi1_step * math.exp(scales.log_xi1)
        log_xi1 = math.log(state.xi1) + step * rng.standard_normal()
        new_xi1 = math.exp(log_xi1)
        state, probability, accepted = _try_move(
            state, table, priors, rng, xi1=new_xi1, log_jacobian=log_xi1 - math.log(state.xi1)
        )
        if stats is not None:
            stats.record("xi1", accepted)
        if adapt_rate is not None:
            scales.log_xi1 += adapt_rate * (probability - config.target_acceptance)

    if "tail" not in frozen:
        multiplier = math.exp(scales.log_tail)
        noise = rng.standard_normal(2)
        new_xi2 = state.xi2 + config.xi2_step * multiplier * noise[0]
        log_sigma = math.log(state.sigma) + config.log_sigma_step * multiplier * noise[1]
        state, probability, accepted = _try_move(
            state,
            table,
            priors,
            rng,
            xi2=new_xi2,
            sigma=math.exp(log_sigma),
            log_jacobian=log_sigma - math.log(state.sigma),
        )
        if stats is not None:
            stats.record("tail", accepted)
        if adapt_rate is not None:
            scales.log_tail += adapt_rate * (probability - config.target_acceptance)

    if "u" not in frozen:
        jump = int(rng.integers(1, config.u_step + 1))
        direction = 1 if rng.random() < 0.5 else -1
        new_u = state.u + direction * jump
        if new_u >= 1:
            state, _, accepted = _try_move(state, table, priors, rng, u=new_u)
        else:
            accepted = False
        if stats is not None:
            stats.record("u", accepted)

    if flip_model and "model" not in frozen:
        other = 1 - state.model
        other_spec = MixtureSpec(bulk=state.bulk, constrained=bool(other))
        log_post, phi = _evaluate(table, other_spec, state.params, priors)
        log_ratio = (
            log_post
            + priors.log_model_prior(other)
            - state.log_post
            - priors.log_model_prior(state.model)
        )
        if log_post == LOG_ZERO or priors.log_model_prior(other) == LOG_ZERO:
            log_ratio = LOG_ZERO
        accepted = _accept(log_ratio, rng)
        if accepted:
            state = replace(state, model=other, phi_u=phi, log_post=log_post)
        if stats is not None:
            stats.record("model", accepted)

    return state


# ---------------------------------------------------------------------------
# chains


def _initial_model(
    priors: PriorSpec, mode: ConstraintMode, rng: np.random.Generator
) -> int:
    if mode.fixed_model is not None:
        return mode.fixed_model
    if priors.prior_m1 >= 1.0:
        return 1
    if priors.prior_m1 <= 0.0:
        return 0
    return int(rng.random() < priors.prior_m1)


def initial_parameters(
    table: FrequencyTable,
    bulk: BulkKind,
    priors: PriorSpec,
    *,
    model: int = 0,
    seed: int = 0,
) -> list[ParamVector]:
    """Profile-likelihood fits ordered by decreasing profile log-likelihood."""
    spec = MixtureSpec(bulk=bulk, constrained=bool(model))
    try:
        profile = profile_threshold(table, spec, priors.phi_bounds, seed=seed)
    except EmptyCandidateError as exc:
        raise ChainInitializationError(str(exc)) from exc
    rows = sorted(profile.rows, key=lambda row: row.loglik, reverse=True)
    return [row.fit.params for row in rows]


def _initial_state(
    table: FrequencyTable,
    bulk: BulkKind,
    priors: PriorSpec,
    model: int,
    starts: Sequence[ParamVector],
    rng: np.random.Generator,
) -> ChainState:
    spec = MixtureSpec(bulk=bulk, constrained=bool(model))
    xi1_ceiling = priors.xi1_lo + 0.9 * (priors.xi1_hi - priors.xi1_lo)
    for start in starts:
        base = replace(start, xi1=min(start.xi1, xi1_ceiling), phi_u=None)
        for attempt in range(_INIT_ATTEMPTS + 1):
            if attempt == _INIT_ATTEMPTS:
                candidate = base
            else:
                jitter = 1.0 + _INIT_JITTER * rng.standard_normal(3)
                candidate = replace(
                    base,
                    xi1=abs(base.xi1 * jitter[0]),
                    xi2=base.xi2 * jitter[1],
                    sigma=abs(base.sigma * jitter[2]),
                )
            log_post, phi = _evaluate(table, spec, candidate, priors)
            if math.isfinite(log_post):
                return ChainState(
                    bulk=bulk,
                    model=model,
                    xi1=candidate.xi1,
                    xi2=candidate.xi2,
                    sigma=candidate.sigma,
                    u=candidate.u,
                    phi_u=phi,
                    log_post=log_post,
                )
    raise ChainInitializationError(
        "No starting point with finite log-posterior was found near the profile fits."
    )


def run_chain(
    table: FrequencyTable,
    bulk: BulkKind | str,
    priors: PriorSpec,
    config: McmcConfig,
    *,
    mode: ConstraintMode | str = ConstraintMode.BOTH,
    initial: Sequence[ParamVector] | None = None,
) -> Trace:
    """Run one chain, discard burn-in and thin.

    Proposal scales adapt toward the target acceptance during burn-in only
    and are frozen afterwards.
    """
    bulk = BulkKind.parse(bulk)
    mode = ConstraintMode.parse(mode)
    rng = np.random.default_rng(config.seed)
    model = _initial_model(priors, mode, rng)
    starts = list(initial) if initial else initial_parameters(table, bulk, priors, model=model)
    try:
        state = _initial_state(table, bulk, priors, model, starts, rng)
    except ChainInitializationError:
        if mode is not ConstraintMode.BOTH or priors.log_model_prior(1 - model) == LOG_ZERO:
            raise
        logger.info("no finite start under M=%d; starting from M=%d", model, 1 - model)
        state = _initial_state(table, bulk, priors, 1 - model, starts, rng)

    scales = ProposalScales()
    stats = BlockStats()
    n_rows = config.n_samples
    rows = np.empty((n_rows, len(TRACE_COLUMNS)), dtype=float)
    flip_model = mode is ConstraintMode.BOTH
    recorded = 0
    progress_every = max(1, config.iterations // 10)

    for iteration in range(1, config.iterations + 1):
        adapt_rate = None
        if config.adapt and iteration <= config.burn_in:
            adapt_rate = min(0.5, 1.0 / math.sqrt(iteration))
        state = gibbs_sweep(
            state,
            table,
            priors,
            config,
            rng,
            scales=scales,
            stats=stats,
            adapt_rate=adapt_rate,
            flip_model=flip_model,
        )
        if iteration == config.burn_in:
            logger.info(
                "burn-in complete after %d sweeps; scales xi1=%.4g tail=%.4g",
                iteration,
                config.xi1_step * math.exp(scales.log_xi1),
                math.exp(scales.log_tail),
            )
        if iteration % progress_every == 0:
            logger.debug("sweep %d/%d u=%d M=%d", iteration, config.iterations, state.u, state.model)
        offset = iteration - config.burn_in
        if offset > 0 and offset % config.thin == 0 and recorded < n_rows:
            rows[recorded] = (
                iteration,
                state.model,
                state.xi1,
                state.xi2,
                state.sigma,
                state.u,
                state.phi_u,
                state.log_post,
            )
            recorded += 1

    tail_multiplier = math.exp(scales.log_tail)
    diagnostics = ChainDiagnostics(
        acceptance=stats.rates(),
        xi1_step=config.xi1_step * math.exp(scales.log_xi1),
        xi2_step=config.xi2_step * tail_multiplier,
        log_sigma_step=config.log_sigma_step * tail_multiplier,
    )
    logger.info("chain finished; acceptance %s", diagnostics.acceptance)
    return Trace.from_rows(rows[:recorded], diagnostics=(diagnostics,))


def _run_chain_job(
    args: tuple[FrequencyTable, BulkKind, PriorSpec, McmcConfig, ConstraintMode, list[ParamVector]],
) -> Trace:
    table, bulk, priors, config, mode, initial = args
    return run_chain(table, bulk, priors, config, mode=mode, initial=initial)


def run_chains(
    table: FrequencyTable,
    bulk: BulkKind | str,
    priors: PriorSpec,
    config: McmcConfig,
    *,
    n_chains: int = 1,
    mode: ConstraintMode | str = ConstraintMode.BOTH,
    initial: Sequence[ParamVector] | None = None,
    max_workers: int | None = None,
) -> Trace:
    """Run independent chains on spawned seed streams and merge them in order."""
    bulk = BulkKind.parse(bulk)
    mode = ConstraintMode.parse(mode)
    if n_chains < 1:
        raise ValueError("n_chains must be a positive integer.")
    seed_sequence = (
        config.seed
        if isinstance(config.seed, np.random.SeedSequence)
        else np.random.SeedSequence(config.seed)
    )
    children = seed_sequence.spawn(n_chains)
    if initial is None:
        model = mode.fixed_model if mode.fixed_model is not None else 0
        initial = initial_parameters(table, bulk, priors, model=model)
    jobs = [
        (table, bulk, priors, replace(config, seed=child), mode, list(initial))
        for child in children
    ]
    if n_chains == 1:
        return _run_chain_job(jobs[0])
    workers = max(1, min(int(max_workers or n_chains), n_chains))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        traces = list(executor.map(_run_chain_job, jobs))
    return Trace.concatenate(traces)


def bayes_factor(trace: Trace, priors: PriorSpec) -> BayesFactor:
    """B01: posterior odds of M=0 against M=1 divided by the prior odds."""
    if len(trace) == 0:
        raise DegenerateTraceError("Cannot estimate a Bayes factor from an empty trace.")
    if not 0.0 < priors.prior_m1 < 1.0:
        raise ValueError("Bayes factor needs positive prior mass on both models.")
    n_constrained = int(np.count_nonzero(trace.model == 1))
    n_unconstrained = len(trace) - n_constrained
    prior_odds = (1.0 - priors.prior_m1) / priors.prior_m1
    if n_constrained and n_unconstrained:
        value = (n_unconstrained / n_constrained) / prior_odds
        return BayesFactor(value, n_unconstrained, n_constrained)
    if n_constrained == 0:
        logger.warning("constrained model never visited; reporting a lower bound on B01")
        return BayesFactor(n_unconstrained / prior_odds, n_unconstrained, 0, bound="lower")
    logger.warning("unconstrained model never visited; reporting an upper bound on B01")
    return BayesFactor(1.0 / n_constrained / prior_odds, 0, n_constrained, bound="upper")
