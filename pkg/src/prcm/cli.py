"""Command-line driver for PRCM experiments.

Usage:
    prcm [--config FILE] [--log-level LEVEL] <subcommand> [flags]

Example:
    prcm verify-duality --d 2 --i 1 --q 2 --p 1/2 --box 0,2x0,2
    prcm enumerate --d 1 --i 1 --box 0,1 --q 2 --p 1/2
    prcm --config config/experiment.yaml sample --sweeps 20000

Exit codes: 0 when every check passed, 1 when a verification failed (the
report carries the witness), 2 for usage or configuration errors.
"""

import argparse
import logging
import sys
from typing import Any, Callable, Dict, List, Optional, Sequence

from pydantic import ValidationError

from .config import (
    SUBCOMMANDS,
    ExperimentConfig,
    default_log_level,
    load_config,
    parse_box,
    parse_cell_list,
)
from .context import Context
from .coupling import certify_wilson_estimator, run_coupled_chain, verify_coupling, wilson_estimate
from .errors import PRCMException, StabilizationError, VerificationError
from .lattice import format_cell
from .measure import enumerate_measure, pressure
from .report import Report, VerificationReport, emit_report
from .sampler import BUILTIN_OBSERVABLES, NullHomologyIndicator, run_chains
from .types import BoundaryCondition
from .verify import (
    verify_conditioning,
    verify_duality,
    verify_ep,
    verify_fkg,
    verify_holley,
    verify_stabilization,
)

logger = logging.getLogger(__name__)

# Exact tables larger than this are summarized rather than listed in reports
TABLE_LISTING_LIMIT = 12


# ============================================================
# Parser
# ============================================================

def _model_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("model")
    group.add_argument("--d", type=int, help="Ambient dimension")
    group.add_argument("--i", type=int, help="Plaquette dimension")
    group.add_argument("--q", type=int, help="Coefficient modulus")
    group.add_argument("--p", help="Parameter as a/b or decimal")
    group.add_argument("--box", help="Primal extents, e.g. 0,2x0,2")
    group.add_argument("--convention", choices=["open", "closed"], help="Top-cell convention")
    group.add_argument(
        "--boundary",
        choices=["free", "wired", "plaquettes", "wired_at_infinity"],
        help="Boundary condition kind",
    )
    group.add_argument("--boundary-cells", help="Cell file or inline cells separated by '|'")
    group.add_argument("--truncation-radius", type=int, help="Explicit truncation radius")
    group.add_argument("--enumeration-cap", type=int, help="Largest plaquette count enumerated")
    out = parser.add_argument_group("output")
    out.add_argument("--output", help="Report path (default: stdout)")
    out.add_argument("--format", choices=["json", "csv"], help="Report format")


def _chain_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("chain")
    group.add_argument("--seed", type=int, help="Master seed")
    group.add_argument("--sweeps", type=int, help="Sweeps per chain")
    group.add_argument("--burn-in", type=int, help="Discarded initial sweeps")
    group.add_argument("--chains", type=int, help="Independent chains")
    group.add_argument("--observables", nargs="+", help="Observables to record")
    group.add_argument("--gamma", help="Wilson cycle: chain file or inline terms separated by '|'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prcm",
        description="Plaquette random-cluster model: exact tables, identities and samplers",
    )
    parser.add_argument("--config", help="YAML experiment file (flags override it)")
    parser.add_argument("--log-level", default=None, help="Logging level (default: $PRCM_LOG_LEVEL or WARNING)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    helps = {
        "enumerate": "Exact table, marginals and pressure",
        "verify-duality": "Exact primal/dual equality for every configuration",
        "verify-fkg": "FKG lattice condition and positive correlations",
        "verify-holley": "Holley domination by a second boundary condition",
        "verify-conditioning": "Conditioning on the plaquettes outside an inner box",
        "verify-coupling": "Marginals of the spin/plaquette coupling",
        "verify-ep": "Configuration-independent Euler-Poincare exponent",
        "sample": "Heat-bath chains",
        "sample-coupled": "Alternating spin/plaquette chain",
        "estimate": "Density, pressure and Wilson observables",
    }
    for name in SUBCOMMANDS:
        cmd = sub.add_parser(name, help=helps[name])
        _model_flags(cmd)
        if name in ("sample", "sample-coupled", "estimate", "verify-coupling", "verify-ep"):
            _chain_flags(cmd)
        if name == "verify-holley":
            cmd.add_argument(
                "--compare-boundary",
                choices=["free", "wired", "plaquettes", "wired_at_infinity"],
                help="Boundary of the dominating measure (default: wired)",
            )
        if name == "verify-conditioning":
            cmd.add_argument("--inner-box", help="Inner box extents")
            cmd.add_argument("--outside-open", help="Open plaquettes outside the inner box")
        if name == "verify-ep":
            cmd.add_argument("--ep-samples", type=int, help="Random configurations when not exhaustive")
    return parser


def configure_logging(level: Optional[str]) -> None:
    logging.basicConfig(
        level=(level or default_log_level()).upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


# ============================================================
# Subcommands
# ============================================================

def _observable(name: str, value: Any, stderr: Any = None, **extra: Any) -> Dict[str, Any]:
    row = {"name": name, "value": value, "stderr": stderr}
    row.update(extra)
    return row


def _verification(config: ExperimentConfig, *reports: VerificationReport) -> Report:
    return Report(
        command=config.command,
        config=config.resolved(),
        passed=all(r.passed for r in reports),
        results={r.check: r.to_dict() for r in reports},
        observables=[_observable(f"{r.check}.passed", r.passed) for r in reports],
    )


def cmd_enumerate(config: ExperimentConfig, ctx: Context) -> Report:
    table = enumerate_measure(ctx)
    marginals = {format_cell(c): table.marginal(k) for k, c in enumerate(ctx.plaquettes)}
    results: Dict[str, Any] = {
        "plaquettes": ctx.n_plaquettes,
        "Z": table.Z,
        "Y": table.Y,
        "marginals": marginals,
        "expected_open": table.expectation(lambda P: P.count()),
    }
    if ctx.n_plaquettes <= TABLE_LISTING_LIMIT:
        results["probabilities"] = {str(m): pr for m, pr in enumerate(table.probabilities)}
    observables = [_observable(f"marginal[{cell}]", value) for cell, value in marginals.items()]
    if 0 < ctx.p < 1 and ctx.n_plaquettes:
        summary = pressure(ctx)
        results["pressure"] = {
            "pi": summary.pi,
            "free_energy": summary.free_energy,
            "density": summary.density,
            "finite_difference": summary.finite_difference,
            "discrepancy": summary.discrepancy,
        }
        observables.append(_observable("pressure", summary.free_energy))
        observables.append(_observable("density", summary.density))
    if ctx.boundary.is_truncated:
        results["stabilization"] = verify_stabilization(ctx, strict=False).to_dict()
    return Report(config.command, config.resolved(), results=results, observables=observables)


def cmd_verify_duality(config: ExperimentConfig, ctx: Context) -> Report:
    report = _verification(config, verify_duality(ctx, strict=False))
    details = report.results["duality"]["details"]
    report.observables.append(_observable("max_discrepancy", details.get("max_discrepancy")))
    return report


def cmd_verify_fkg(config: ExperimentConfig, ctx: Context) -> Report:
    return _verification(config, verify_fkg(ctx, strict=False))


def cmd_verify_holley(config: ExperimentConfig, ctx: Context) -> Report:
    upper = ctx.replace(boundary=BoundaryCondition(config.compare_boundary), truncation_radius=None)
    return _verification(config, verify_holley(ctx, upper, strict=False))


def cmd_verify_conditioning(config: ExperimentConfig, ctx: Context) -> Report:
    inner = parse_box(config.inner_box, config.convention)
    opened = parse_cell_list(config.outside_open) if config.outside_open else []
    return _verification(config, verify_conditioning(ctx, inner, opened, strict=False))


def cmd_verify_coupling(config: ExperimentConfig, ctx: Context) -> Report:
    report = _verification(config, verify_coupling(ctx, strict=False))
    if config.gamma:
        cert = certify_wilson_estimator(ctx, config.gamma_chain())
        report.results["wilson"] = cert.to_dict()
        report.observables.append(_observable("null_homology", cert.null_homology))
    return report


def cmd_verify_ep(config: ExperimentConfig, ctx: Context) -> Report:
    return _verification(config, verify_ep(ctx, samples=config.ep_samples, seed=config.seed, strict=False))


def _chain_rows(stats, config: ExperimentConfig) -> List[Dict[str, Any]]:
    return [
        _observable(
            name,
            s.mean,
            s.stderr,
            mean=s.mean,
            batches=s.batches,
            sweeps=config.sweeps,
            seed=config.seed,
        )
        for name, s in stats.items()
    ]


def _chain_observables(config: ExperimentConfig, ctx: Context) -> Dict[str, Callable]:
    chosen = {name: BUILTIN_OBSERVABLES[name] for name in config.observables if name in BUILTIN_OBSERVABLES}
    if "null_homology" in config.observables and config.gamma:
        chosen["null_homology"] = NullHomologyIndicator(ctx, config.gamma_chain())
    skipped = [n for n in config.observables if n not in chosen]
    if skipped:
        logger.warning(f"Observables {skipped} are not recorded by {config.command}")
    return chosen or {"density": BUILTIN_OBSERVABLES["density"]}


def cmd_sample(config: ExperimentConfig, ctx: Context) -> Report:
    run = run_chains(
        ctx,
        sweeps=config.sweeps,
        burn_in=config.burn_in,
        seed=config.seed,
        chains=config.chains,
        observables=_chain_observables(config, ctx),
    )
    return Report(
        config.command,
        config.resolved(),
        results={"chains": run.to_dict()},
        observables=_chain_rows(run.stats, config),
    )


def cmd_sample_coupled(config: ExperimentConfig, ctx: Context) -> Report:
    gamma = config.gamma_chain() if config.gamma else None
    run = run_coupled_chain(ctx, config.sweeps, config.burn_in, config.seed, gamma=gamma)
    return Report(
        config.command,
        config.resolved(),
        results={"chain": run.to_dict()},
        observables=_chain_rows(run.stats, config),
    )


def cmd_estimate(config: ExperimentConfig, ctx: Context) -> Report:
    results: Dict[str, Any] = {}
    rows: List[Dict[str, Any]] = []
    wanted = set(config.observables)
    if wanted & {"density", "open_count", "null_homology"}:
        run = run_chains(
            ctx,
            sweeps=config.sweeps,
            burn_in=config.burn_in,
            seed=config.seed,
            chains=config.chains,
            observables=_chain_observables(config, ctx),
        )
        results["chains"] = run.to_dict()
        rows.extend(_chain_rows(run.stats, config))
    if "pressure" in wanted:
        summary = pressure(ctx)
        results["pressure"] = {
            "free_energy": summary.free_energy,
            "density": summary.density,
            "finite_difference": summary.finite_difference,
        }
        rows.append(_observable("pressure", summary.free_energy))
    if "wilson" in wanted:
        stats = wilson_estimate(ctx, config.gamma_chain(), config.sweeps, config.burn_in, config.seed)
        results["wilson"] = {name: s.to_dict() for name, s in stats.items()}
        rows.extend(_chain_rows({f"wilson.{k}": v for k, v in stats.items()}, config))
    return Report(config.command, config.resolved(), results=results, observables=rows)


COMMANDS: Dict[str, Callable[[ExperimentConfig, Context], Report]] = {
    "enumerate": cmd_enumerate,
    "verify-duality": cmd_verify_duality,
    "verify-fkg": cmd_verify_fkg,
    "verify-holley": cmd_verify_holley,
    "verify-conditioning": cmd_verify_conditioning,
    "verify-coupling": cmd_verify_coupling,
    "verify-ep": cmd_verify_ep,
    "sample": cmd_sample,
    "sample-coupled": cmd_sample_coupled,
    "estimate": cmd_estimate,
}


# ============================================================
# Entry point
# ============================================================

def run(config: ExperimentConfig) -> Report:
    """Execute one validated configuration and return its report."""
    ctx = config.context()
    logger.info(f"Running {config.command} on d={ctx.d} i={ctx.i} q={ctx.q} p={ctx.p}")
    return COMMANDS[config.command](config, ctx)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 2
    configure_logging(args.log_level)

    overrides = {k: v for k, v in vars(args).items() if k not in ("config", "log_level")}
    try:
        config = load_config(args.config, overrides)
    except (ValidationError, PRCMException) as e:
        print(f"prcm: invalid configuration: {e}", file=sys.stderr)
        return 2

    try:
        report = run(config)
    except (VerificationError, StabilizationError) as e:
        failure = e.report if isinstance(e, VerificationError) else VerificationReport(
            check="stabilization", passed=False, witness={"reason": str(e)}
        )
        logger.error(f"{config.command} failed: {e}")
        report = Report(config.command, config.resolved(), passed=False, results={failure.check: failure.to_dict()})
    except PRCMException as e:
        print(f"prcm: {e}", file=sys.stderr)
        return 2

    try:
        emit_report(report, config.output, config.format)
    except OSError as e:
        print(f"prcm: could not write report: {e}", file=sys.stderr)
        return 2
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
