from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import stats

from tailmix.distributions import BulkKind, MixtureSpec, ParamVector, constrained_phi
from tailmix.fixtures import load_fixture
from tailmix.likelihood import FrequencyTable, mle_exceedance
from tailmix.sampler import (
    ChainInitializationError,
    ChainState,
    ConstraintMode,
    DegenerateTraceError,
    McmcConfig,
    PriorSpec,
    Trace,
    bayes_factor,
    gibbs_sweep,
    log_posterior,
    run_chain,
    run_chains,
)

GEOMETRIC_START = ParamVector(xi1=5.0, xi2=0.3, sigma=2.0, u=15)


@pytest.fixture(scope="module")
def geometric_table() -> FrequencyTable:
    return load_fixture("geometric_constrained")


def _model_trace(n_unconstrained: int, n_constrained: int) -> Trace:
    rows = [(i, 0, 1.0, 0.1, 1.0, 3, 0.2, -1.0) for i in range(n_unconstrained)]
    rows += [(i, 1, 1.0, 0.1, 1.0, 3, 0.2, -1.0) for i in range(n_constrained)]
    return Trace.from_rows(rows)


def test_constraint_mode_parse() -> None:
    assert ConstraintMode.parse("both") is ConstraintMode.BOTH
    assert ConstraintMode.parse("constrained_only") is ConstraintMode.CONSTRAINED
    assert ConstraintMode.parse("UNCONSTRAINED").fixed_model == 0
    assert ConstraintMode.BOTH.fixed_model is None
    with pytest.raises(ValueError):
        ConstraintMode.parse("mixed")


def test_prior_log_density_matches_scipy() -> None:
    priors = PriorSpec()
    xi1, xi2, sigma, phi = 2.5, -1.2, 0.03, 0.1
    expected = (
        stats.uniform.logpdf(xi1, loc=0.0, scale=100.0)
        + stats.norm.logpdf(xi2, loc=0.0, scale=30.0)
        + stats.gamma.logpdf(sigma, a=1.0, scale=0.01)
        + stats.uniform.logpdf(phi, loc=0.005, scale=0.395)
    )
    assert priors.log_density(xi1, xi2, sigma, phi) == pytest.approx(expected, rel=1e-12)

    rate_form = PriorSpec(sigma_shape=2.0, sigma_scale=4.0, sigma_param="rate")
    assert rate_form.log_density(xi1, xi2, sigma, phi) - priors.log_density(
        xi1, xi2, sigma, phi
    ) == pytest.approx(
        stats.gamma.logpdf(sigma, a=2.0, scale=0.25) - stats.gamma.logpdf(sigma, a=1.0, scale=0.01),
        rel=1e-12,
    )


def test_prior_support_is_enforced() -> None:
    priors = PriorSpec()
    assert priors.log_density(0.0, 0.1, 1.0, 0.1) == float("-inf")
    assert priors.log_density(100.0, 0.1, 1.0, 0.1) == float("-inf")
    assert priors.log_density(1.0, 0.1, 1.0, 0.41) == float("-inf")
    assert priors.log_density(1.0, 0.1, -1.0, 0.1) == float("-inf")
    assert priors.log_model_prior(1) == pytest.approx(math.log(0.5))
    assert PriorSpec(prior_m1=1.0).log_model_prior(0) == float("-inf")


def test_prior_overrides_and_validation() -> None:
    priors = PriorSpec().with_overrides({"phi_hi": "0.3", "sigma_param": "rate"})
    assert priors.phi_bounds == (0.005, 0.3)
    assert priors.sigma_rate == pytest.approx(0.01)
    with pytest.raises(ValueError, match="Unknown prior field"):
        PriorSpec().with_overrides({"kappa": 1.0})
    with pytest.raises(ValueError):
        PriorSpec(prior_m1=1.5)
    with pytest.raises(ValueError):
        PriorSpec(phi_lo=0.5, phi_hi=0.4)


def test_mcmc_config_defaults_and_validation() -> None:
    config = McmcConfig()
    assert config.n_samples == 20_000
    assert McmcConfig(iterations=400, burn_in=100, thin=10).n_samples == 30
    with pytest.raises(ValueError):
        McmcConfig(iterations=10, burn_in=10)
    with pytest.raises(ValueError):
        McmcConfig(u_step=0)
    with pytest.raises(ValueError):
        McmcConfig(frozen_blocks=frozenset({"alpha"}))


def test_gibbs_sweep_requires_finite_state(geometric_table: FrequencyTable) -> None:
    state = ChainState(bulk=BulkKind.GEOMETRIC, model=0, xi1=1.0, xi2=0.1, sigma=1.0, u=3)
    with pytest.raises(ChainInitializationError):
        gibbs_sweep(state, geometric_table, PriorSpec(), McmcConfig(), np.random.default_rng(0))


def test_threshold_block_targets_two_point_posterior() -> None:
    # only u=1 and u=2 give an exceedance proportion inside (0.3, 0.7)
    table = FrequencyTable.from_counts({1: 2, 2: 1, 3: 2})
    priors = PriorSpec(phi_lo=0.3, phi_hi=0.7)
    config = McmcConfig(
        iterations=100_000,
        burn_in=0,
        thin=1,
        seed=31,
        adapt=False,
        frozen_blocks=frozenset({"xi1", "tail", "model"}),
    )
    start = ParamVector(xi1=1.0, xi2=0.2, sigma=1.0, u=1)
    trace = run_chain(
        table, BulkKind.GEOMETRIC, priors, config, mode="unconstrained", initial=[start]
    )
    assert len(trace) == 100_000
    assert set(np.unique(trace.u)) <= {1, 2}

    spec = MixtureSpec(BulkKind.GEOMETRIC, constrained=False)
    fixed = trace.params_at(0)
    log_one, log_two = (
        log_posterior(
            table, spec, ParamVector(xi1=fixed.xi1, xi2=fixed.xi2, sigma=fixed.sigma, u=u), priors
        )
        for u in (1, 2)
    )
    ratio = math.exp(log_two - log_one)
    target = ratio / (1.0 + ratio)

    up = 0.5 * min(1.0, ratio)
    down = 0.5 * min(1.0, 1.0 / ratio)
    rho = 1.0 - up - down
    variance = target * (1.0 - target) / len(trace) * (1.0 + rho) / (1.0 - rho)
    assert abs(float(np.mean(trace.u == 2)) - target) < 4.0 * math.sqrt(variance)


def test_model_flip_reduces_to_prior_when_likelihoods_agree(
    geometric_table: FrequencyTable, monkeypatch: pytest.MonkeyPatch
) -> None:
    monkeypatch.setattr("tailmix.sampler.resolve_phi", lambda table, spec, params: 0.2)
    priors = PriorSpec(prior_m1=0.3)
    config = McmcConfig(
        iterations=20_000,
        burn_in=0,
        thin=1,
        seed=5,
        adapt=False,
        frozen_blocks=frozenset({"xi1", "tail", "u"}),
    )
    trace = run_chain(
        geometric_table, BulkKind.GEOMETRIC, priors, config, mode="both", initial=[GEOMETRIC_START]
    )
    share = float(np.mean(trace.model == 1))
    # two-state chain with P(1->0) = 1 and P(0->1) = 3/7
    variance = 0.3 * 0.7 / len(trace) * 0.4
    assert abs(share - 0.3) < 4.0 * math.sqrt(variance)


def test_degenerate_model_prior_pins_the_indicator(geometric_table: FrequencyTable) -> None:
    priors = PriorSpec(prior_m1=1.0)
    config = McmcConfig(iterations=200, burn_in=50, thin=1, seed=2)
    trace = run_chain(
        geometric_table, BulkKind.GEOMETRIC, priors, config, mode="both", initial=[GEOMETRIC_START]
    )
    assert np.all(trace.model == 1)
    with pytest.raises(ValueError):
        bayes_factor(trace, priors)


def test_zero_proposal_scales_are_always_accepted(geometric_table: FrequencyTable) -> None:
    config = McmcConfig(
        iterations=50,
        burn_in=0,
        thin=1,
        seed=8,
        xi1_step=0.0,
        xi2_step=0.0,
        log_sigma_step=0.0,
        adapt=False,
        frozen_blocks=frozenset({"u", "model"}),
    )
    trace = run_chain(
        geometric_table,
        BulkKind.GEOMETRIC,
        PriorSpec(),
        config,
        mode="constrained",
        initial=[GEOMETRIC_START],
    )
    (diagnostics,) = trace.diagnostics
    assert diagnostics.acceptance == {"xi1": 1.0, "tail": 1.0}


def test_phi_follows_the_model_indicator(geometric_table: FrequencyTable) -> None:
    config = McmcConfig(iterations=300, burn_in=100, thin=2, seed=12)
    trace = run_chain(
        geometric_table,
        BulkKind.GEOMETRIC,
        PriorSpec(),
        config,
        mode="both",
        initial=[GEOMETRIC_START],
    )
    assert len(trace) == 100
    assert np.all(np.diff(trace.iteration) == 2)
    spec = MixtureSpec(BulkKind.GEOMETRIC, constrained=True)
    for index in range(len(trace)):
        u = int(trace.u[index])
        if trace.model[index] == 0:
            assert trace.phi_u[index] == mle_exceedance(geometric_table, u)
        else:
            expected = constrained_phi(
                spec, trace.xi1[index], trace.xi2[index], trace.sigma[index], u
            )
            assert trace.phi_u[index] == pytest.approx(expected, rel=1e-12)
        assert 0.005 <= trace.phi_u[index] <= 0.4
        assert math.isfinite(trace.log_post[index])


def test_run_chain_is_deterministic_for_a_seed(geometric_table: FrequencyTable) -> None:
    config = McmcConfig(iterations=150, burn_in=50, thin=5, seed=99)
    first = run_chain(
        geometric_table, "geometric", PriorSpec(), config, initial=[GEOMETRIC_START]
    )
    second = run_chain(
        geometric_table, "geometric", PriorSpec(), config, initial=[GEOMETRIC_START]
    )
    for name, column in first.columns().items():
        np.testing.assert_array_equal(column, second.columns()[name], err_msg=name)


def test_run_chains_merges_spawned_streams(geometric_table: FrequencyTable) -> None:
    config = McmcConfig(iterations=120, burn_in=20, thin=10, seed=4)
    trace = run_chains(
        geometric_table,
        BulkKind.GEOMETRIC,
        PriorSpec(),
        config,
        n_chains=2,
        mode="constrained",
        initial=[GEOMETRIC_START],
    )
    assert len(trace) == 2 * config.n_samples
    assert len(trace.diagnostics) == 2
    assert np.all(trace.model == 1)
    first, second = trace.xi1[: config.n_samples], trace.xi1[config.n_samples :]
    assert not np.array_equal(first, second)


def test_chain_without_admissible_threshold_fails_to_start() -> None:
    table = FrequencyTable.from_counts({1: 100})
    config = McmcConfig(iterations=10, burn_in=0)
    with pytest.raises(ChainInitializationError):
        run_chain(table, BulkKind.GEOMETRIC, PriorSpec(), config, mode="unconstrained")


def test_bayes_factor_from_model_occupancy() -> None:
    result = bayes_factor(_model_trace(6000, 4000), PriorSpec())
    assert result.value == pytest.approx(1.5)
    assert result.bound is None

    skewed_prior = bayes_factor(_model_trace(50, 50), PriorSpec(prior_m1=0.25))
    assert skewed_prior.value == pytest.approx(1.0 / 3.0)


def test_bayes_factor_bounds_for_one_sided_traces() -> None:
    lower = bayes_factor(_model_trace(10, 0), PriorSpec())
    assert lower.bound == "lower"
    assert lower.value == pytest.approx(10.0)

    upper = bayes_factor(_model_trace(0, 10), PriorSpec())
    assert upper.bound == "upper"
    assert upper.value == pytest.approx(0.1)

    with pytest.raises(DegenerateTraceError):
        bayes_factor(_model_trace(0, 0), PriorSpec())
