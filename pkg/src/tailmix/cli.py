from __future__ import annotations

import argparse
from dataclasses import fields
import json
import logging
from pathlib import Path
import sys
from typing import Any

from tailmix import __version__
from tailmix.config import DATA_FORMATS, EnvironmentConfig, RunConfig, resolve_seed
from tailmix.distributions import BulkKind, MixtureSpec, ParamVector, sample_mixture
from tailmix.fixtures import available_fixtures
from tailmix.ingest import frequency_csv_text, write_edge_list, write_frequency_csv, write_raw
from tailmix.likelihood import (
    FrequencyTable,
    ThresholdProfile,
    fit_discrete_power_law,
    profile_threshold,
)
from tailmix.outputs import (
    read_trace,
    to_jsonable,
    write_band,
    write_baseline,
    write_json,
    write_profile,
    write_trace,
)
from tailmix.posterior import (
    baseline_power_law_curve,
    data_diagnostics,
    exponent_posterior,
    frequency_band,
    ks_statistic,
    parameter_summary,
    phi_unique_count,
    split_by_model,
    survival_band,
    threshold_posterior,
)
from tailmix.sampler import (
    ConstraintMode,
    McmcConfig,
    PriorSpec,
    Trace,
    bayes_factor,
    run_chains,
)

logger = logging.getLogger(__name__)

_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
_PRIOR_FIELDS: tuple[str, ...] = tuple(item.name for item in fields(PriorSpec))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailmix",
        description=(
            "Fit discrete extreme value mixtures (geometric or power-law bulk with an "
            "integer GPD tail) to heavy-tailed count data."
        ),
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="Increase log verbosity (-v for INFO, -vv for DEBUG).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit_parser = sub.add_parser(
        "fit",
        help="Run the MCMC sampler and write trace, summary, bands and diagnostics.",
    )
    _add_data_arguments(fit_parser)
    _add_model_arguments(fit_parser)
    _add_prior_arguments(fit_parser)
    fit_parser.add_argument("--iters", type=int, default=McmcConfig.iterations)
    fit_parser.add_argument("--burnin", type=int, default=McmcConfig.burn_in)
    fit_parser.add_argument("--thin", type=int, default=McmcConfig.thin)
    fit_parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Random seed. Falls back to TAILMIX_SEED when omitted.",
    )
    fit_parser.add_argument(
        "--chains",
        type=int,
        default=1,
        help="Independent chains, run in parallel worker processes.",
    )
    fit_parser.add_argument(
        "--u-step",
        type=int,
        default=McmcConfig.u_step,
        help="Largest jump of the integer threshold proposal.",
    )
    fit_parser.add_argument(
        "--no-adapt",
        action="store_true",
        help="Keep the initial proposal scales during burn-in.",
    )
    fit_parser.add_argument(
        "--level",
        type=float,
        default=0.99,
        help="Credible level of the survival and frequency bands.",
    )
    fit_parser.add_argument("--out", type=Path, default=Path("tailmix-out"))
    fit_parser.set_defaults(handler=_cmd_fit)

    profile_parser = sub.add_parser(
        "profile",
        help="Write the profile log-likelihood over every admissible threshold.",
    )
    _add_data_arguments(profile_parser)
    _add_model_arguments(profile_parser)
    _add_prior_arguments(profile_parser)
    profile_parser.add_argument("--out", type=Path, default=Path("tailmix-out"))
    profile_parser.set_defaults(handler=_cmd_profile)

    ks_parser = sub.add_parser(
        "ks",
        help="Recompute KS statistics, Bayes factor and exponents from a stored trace.",
    )
    _add_data_arguments(ks_parser)
    ks_parser.add_argument(
        "--bulk",
        choices=["geometric", "powerlaw"],
        default="powerlaw",
    )
    _add_prior_arguments(ks_parser)
    ks_parser.add_argument("--trace", type=Path, required=True)
    ks_parser.add_argument(
        "--output",
        type=Path,
        default=None,
        help="Optional path to write the JSON result.",
    )
    ks_parser.set_defaults(handler=_cmd_ks)

    simulate_parser = sub.add_parser(
        "simulate",
        help="Draw a sample from a mixture with given parameters.",
    )
    simulate_parser.add_argument(
        "--bulk",
        choices=["geometric", "powerlaw"],
        default="geometric",
    )
    simulate_parser.add_argument(
        "--unconstrained",
        action="store_true",
        help="Use --phi as the tail mass instead of the continuity constraint.",
    )
    simulate_parser.add_argument("--xi1", type=float, default=5.0)
    simulate_parser.add_argument("--xi2", type=float, default=0.3)
    simulate_parser.add_argument("--sigma", type=float, default=2.0)
    simulate_parser.add_argument("--u", type=int, default=15)
    simulate_parser.add_argument("--phi", type=float, default=None)
    simulate_parser.add_argument("--n", type=int, default=1000)
    simulate_parser.add_argument("--seed", type=int, default=None)
    simulate_parser.add_argument("--format", choices=list(DATA_FORMATS), default="freq-csv")
    simulate_parser.add_argument(
        "--output",
        type=Path,
        default=None,
        help="Output file. freq-csv is printed to stdout when omitted.",
    )
    simulate_parser.set_defaults(handler=_cmd_simulate)

    diagnose_parser = sub.add_parser(
        "diagnose",
        help="Print data diagnostics (zero share, proportion <= 2, phi grid size).",
    )
    _add_data_arguments(diagnose_parser)
    _add_prior_arguments(diagnose_parser)
    diagnose_parser.add_argument("--output", type=Path, default=None)
    diagnose_parser.set_defaults(handler=_cmd_diagnose)

    return parser


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--data", type=Path, default=None, help="Input data file.")
    source.add_argument(
        "--fixture",
        choices=available_fixtures(),
        default=None,
        help="Use a bundled synthetic dataset instead of --data.",
    )
    parser.add_argument("--format", choices=list(DATA_FORMATS), default="freq-csv")


def _add_model_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--bulk", choices=["geometric", "powerlaw"], default="powerlaw")
    parser.add_argument(
        "--mode",
        choices=[mode.value for mode in ConstraintMode],
        default=ConstraintMode.BOTH.value,
    )


def _add_prior_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("prior overrides")
    for name in _PRIOR_FIELDS:
        group.add_argument(
            f"--prior.{name}",
            dest=f"prior_{name}",
            default=None,
            metavar="VALUE",
        )


def _priors_from_args(args: argparse.Namespace) -> PriorSpec:
    overrides = {
        name: getattr(args, f"prior_{name}")
        for name in _PRIOR_FIELDS
        if getattr(args, f"prior_{name}", None) is not None
    }
    return PriorSpec().with_overrides(overrides)


def _run_config_from_args(args: argparse.Namespace) -> RunConfig:
    mcmc = McmcConfig()
    if args.command == "fit":
        mcmc = McmcConfig(
            iterations=int(args.iters),
            burn_in=int(args.burnin),
            thin=int(args.thin),
            seed=resolve_seed(args.seed),
            u_step=int(args.u_step),
            adapt=not bool(args.no_adapt),
        )
    return RunConfig(
        data_path=args.data,
        fixture=args.fixture,
        data_format=str(args.format),
        bulk=BulkKind.parse(getattr(args, "bulk", "powerlaw")),
        mode=ConstraintMode.parse(getattr(args, "mode", ConstraintMode.BOTH.value)),
        priors=_priors_from_args(args),
        mcmc=mcmc,
        output_dir=getattr(args, "out", None) or Path("tailmix-out"),
        level=float(getattr(args, "level", 0.99)),
        n_chains=int(getattr(args, "chains", 1)),
    )


def _configure_logging(verbosity: int) -> None:
    if verbosity >= 2:
        level = "DEBUG"
    elif verbosity == 1:
        level = "INFO"
    else:
        level = EnvironmentConfig.from_env().log_level
    logging.basicConfig(level=level, format=_LOG_FORMAT, stream=sys.stderr)


def _model_summary(trace: Trace, table: FrequencyTable, spec: MixtureSpec) -> dict[str, Any]:
    if len(trace) == 0:
        return {"rows": 0}
    exponents = exponent_posterior(trace)
    thresholds = threshold_posterior(trace)
    return {
        "rows": len(trace),
        "parameters": {
            name: summary.to_json() for name, summary in parameter_summary(trace).items()
        },
        "exponents": exponents.summary(),
        "n_nonpositive_xi2": exponents.n_nonpositive_xi2,
        "ks": ks_statistic(trace, table, spec).to_json(),
        "u_modes": list(thresholds.modes),
        "phi_unique_count": phi_unique_count(trace),
    }


def _bayes_factor_payload(trace: Trace, priors: PriorSpec) -> dict[str, Any] | None:
    if not 0.0 < priors.prior_m1 < 1.0 or len(trace) == 0:
        return None
    result = bayes_factor(trace, priors)
    if result.bound is not None:
        print(
            f"warning: one model was never visited; B01 is a {result.bound} bound.",
            file=sys.stderr,
        )
    elif result.value < 1.0:
        print(
            f"warning: B01={result.value:.4g} is below 1; the constrained model is "
            "favoured beyond Monte Carlo error expectations.",
            file=sys.stderr,
        )
    return result.to_json()


def _stats_payload(
    trace: Trace,
    table: FrequencyTable,
    bulk: BulkKind,
    priors: PriorSpec,
    *,
    compare_models: bool = True,
) -> dict[str, Any]:
    constrained, unconstrained = split_by_model(trace)
    return {
        "models": {
            "1": _model_summary(constrained, table, MixtureSpec(bulk, constrained=True)),
            "0": _model_summary(unconstrained, table, MixtureSpec(bulk, constrained=False)),
        },
        "bayes_factor": _bayes_factor_payload(trace, priors) if compare_models else None,
    }


def _cmd_fit(args: argparse.Namespace) -> int:
    config = _run_config_from_args(args)
    table = config.load_table()
    logger.info("loaded %d positive observations (%d zeros)", table.n, table.zero_count)

    trace = run_chains(
        table,
        config.bulk,
        config.priors,
        config.mcmc,
        n_chains=config.n_chains,
        mode=config.mode,
    )
    out = config.output_dir
    files = [write_trace(trace, out / "trace.csv")]

    bands: dict[int, Any] = {}
    freq_bands: dict[int, Any] = {}
    for model, part in zip((1, 0), split_by_model(trace)):
        if len(part) == 0:
            continue
        spec = MixtureSpec(config.bulk, constrained=bool(model))
        bands[model] = survival_band(part, table, spec, config.level)
        freq_bands[model] = frequency_band(part, table, spec, config.level)
    files.append(write_band(bands, out / "band.csv"))
    files.append(write_band(freq_bands, out / "freq_band.csv"))

    summary = _stats_payload(
        trace,
        table,
        config.bulk,
        config.priors,
        compare_models=config.mode is ConstraintMode.BOTH,
    )
    try:
        baseline = fit_discrete_power_law(table)
    except ValueError as exc:
        print(f"warning: power-law baseline skipped: {exc}", file=sys.stderr)
    else:
        summary["baseline_power_law"] = baseline.to_json()
        curve = baseline_power_law_curve(table, baseline)
        files.append(write_baseline(curve, out / "baseline.csv"))
    summary["config"] = config.to_json()
    files.append(write_json(summary, out / "summary.json"))

    diagnostics = {
        "data": data_diagnostics(table, config.priors.phi_bounds).to_json(),
        "chains": [item.to_json() for item in trace.diagnostics],
    }
    files.append(write_json(diagnostics, out / "diagnostics.json"))

    payload = {
        "output_dir": str(out),
        "files": [str(path) for path in files],
        "rows": len(trace),
        "bayes_factor": summary["bayes_factor"],
    }
    print(json.dumps(payload, indent=2))
    return 0


def _cmd_profile(args: argparse.Namespace) -> int:
    config = _run_config_from_args(args)
    table = config.load_table()
    if config.mode.fixed_model is None:
        models = [1, 0]
    else:
        models = [config.mode.fixed_model]

    profiles: list[ThresholdProfile] = []
    best: dict[str, Any] = {}
    for model in models:
        spec = MixtureSpec(config.bulk, constrained=bool(model))
        profile = profile_threshold(table, spec, config.priors.phi_bounds)
        profiles.append(profile)
        flagged = sum(1 for row in profile.rows if row.fit.flagged)
        if flagged:
            print(
                f"warning: {flagged} profile fits for M={model} carry diagnostic flags.",
                file=sys.stderr,
            )
        best[str(model)] = {"loglik": profile.best.loglik, **profile.best.fit.to_json()}

    path = write_profile(profiles, config.output_dir / "profile.csv")
    print(json.dumps({"profile": str(path), "argmax": best}, indent=2))
    return 0


def _cmd_ks(args: argparse.Namespace) -> int:
    config = _run_config_from_args(args)
    table = config.load_table()
    trace = read_trace(args.trace)
    payload = _stats_payload(trace, table, config.bulk, config.priors)
    rendered = json.dumps(to_jsonable(payload), indent=2)
    if args.output is not None:
        write_json(payload, args.output)
    print(rendered)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    spec = MixtureSpec(BulkKind.parse(args.bulk), constrained=not bool(args.unconstrained))
    if args.unconstrained and args.phi is None:
        raise ValueError("--phi is required with --unconstrained.")
    params = ParamVector(
        xi1=float(args.xi1),
        xi2=float(args.xi2),
        sigma=float(args.sigma),
        u=int(args.u),
        phi_u=float(args.phi) if args.unconstrained else None,
    )
    draws = sample_mixture(spec, params, int(args.n), seed=resolve_seed(args.seed))
    table = FrequencyTable.from_observations(draws)

    if args.output is None:
        if args.format != "freq-csv":
            raise ValueError("--output is required for raw and edges formats.")
        sys.stdout.write(frequency_csv_text(table))
        return 0
    writers = {"freq-csv": write_frequency_csv, "raw": write_raw, "edges": write_edge_list}
    path = writers[args.format](table, args.output)
    print(json.dumps({"output": str(path), "n": table.n}, indent=2))
    return 0


def _cmd_diagnose(args: argparse.Namespace) -> int:
    config = _run_config_from_args(args)
    table = config.load_table()
    payload = data_diagnostics(table, config.priors.phi_bounds).to_json()
    if args.output is not None:
        write_json(payload, args.output)
    print(json.dumps(to_jsonable(payload), indent=2))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _configure_logging(int(args.verbose))
        return int(args.handler(args))
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
