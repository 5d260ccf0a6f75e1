"""Command line entry point: ``ras-scopf <subcommand> [options]``."""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from ras_scopf.cascade.simulator import run_cascade
from ras_scopf.core.case_reader import parse_case, write_case
from ras_scopf.core.errors import (
    CascadeError,
    CaseFormatError,
    ConfigError,
    ConsistencyError,
    NetworkValidationError,
    SolverFailedError,
)
from ras_scopf.core.utils import parse_id_set
from ras_scopf.experiments.harness import (
    compare_formulations,
    design_scheme,
    find_critical_contingencies,
    sensitivity_study,
)
from ras_scopf.experiments.reports import ExperimentReport
from ras_scopf.experiments.scenarios import DISTRIBUTIONS, ScenarioSpec
from ras_scopf.experiments.settings import Settings, load_settings
from ras_scopf.formulations import FORMULATIONS, RASAwareSCOPF
from ras_scopf.formulations.scheme import as_contingency
from ras_scopf.miqp.mps import export_mps
from ras_scopf.miqp.options import BACKENDS

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INVALID = 4  # Case or configuration rejected
EXIT_SOLVER = 5
EXIT_CONSISTENCY = 6  # Extracted solution or cascade transition failed its checks

CASCADE_DISPATCHES = ("opf", "scopf", "ras-scopf")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment settings (default: built-in case-study settings)")
    common.add_argument("--case", help="case file, overrides case.path")
    common.add_argument("--output", help="report directory, overrides output.directory")
    common.add_argument("--backend", choices=BACKENDS, help="solver backend, overrides solver.backend")
    common.add_argument("--workers", type=int, help="thread pool size, overrides output.workers")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress at INFO level")
    common.add_argument("--debug", action="store_true", help="log solver detail at DEBUG level")

    parser = argparse.ArgumentParser(
        prog="ras-scopf",
        description="Design remedial action schemes with RAS-SCOPF and stress dispatches with cascades.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    prep = sub.add_parser("prepare-case", parents=[common], help="apply the case-study rating changes")
    prep.add_argument("--out", required=True, help="destination case file")

    solve = sub.add_parser("solve", parents=[common], help="solve one formulation")
    solve.add_argument("--formulation", choices=sorted(FORMULATIONS), default="ras-scopf")
    solve.add_argument("--trip", help="trip set for ras-aware-scopf, e.g. '22'; designed when omitted")

    sub.add_parser("critical-contingencies", parents=[common], help="scan OPF post-contingency overloads")
    sub.add_parser("compare", parents=[common], help="compare OPF, RAS-SCOPF and SCOPF")

    cascade = sub.add_parser("cascade", parents=[common], help="simulate one cascade")
    cascade.add_argument("--dispatch", choices=CASCADE_DISPATCHES, default="opf")
    cascade.add_argument("--outage", required=True, help="outaged line ids, e.g. '23' or '7+18'")

    sens = sub.add_parser("sensitivity", parents=[common], help="load-scaling sensitivity study")
    sens.add_argument("--distribution", choices=sorted(DISTRIBUTIONS), help="scaling distribution")
    sens.add_argument("--low", type=float, help="custom lower scaling bound")
    sens.add_argument("--high", type=float, help="custom upper scaling bound")
    sens.add_argument("--count", type=int, help="number of scenarios")
    sens.add_argument("--seed", type=int, help="random seed")
    sens.add_argument("--trip", help="fixed trip set; designed with RAS-SCOPF when omitted")
    sens.add_argument(
        "--contingency", action="append", help="restrict cascades to these outages (repeatable)"
    )

    mps = sub.add_parser("export-mps", parents=[common], help="write a formulation as MPS")
    mps.add_argument("--formulation", choices=sorted(FORMULATIONS), default="ras-scopf")
    mps.add_argument("--out", help="destination file (default: <output>/<formulation>.mps)")
    return parser


def _configure_logging(args) -> None:
    level = logging.DEBUG if args.debug else logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")


def _settings(args) -> Settings:
    settings = load_settings(args.config)
    if args.case:
        settings.case.path = Path(args.case)
    if args.output:
        settings.output_dir = Path(args.output)
    if args.backend:
        settings.solver = replace(settings.solver, backend=args.backend)
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        settings.workers = args.workers
    return settings


def _scheme(args, settings: Settings, net):
    if args.trip:
        return settings.formulation.schemes[0].with_trip_set(parse_id_set(args.trip)).validate(net)
    scheme, _ = design_scheme(net, settings.formulation, settings.solver)
    return scheme


def _write(report: ExperimentReport, settings: Settings) -> None:
    for path in report.write(settings.output_dir):
        print(path)


def cmd_prepare_case(args, settings: Settings) -> int:
    net = settings.prepare(parse_case(settings.case.path))
    print(write_case(net, args.out))
    return EXIT_OK


def cmd_solve(args, settings: Settings) -> int:
    net = settings.load_network()
    if args.formulation == RASAwareSCOPF.name:
        formulation = RASAwareSCOPF(net, settings.formulation, _scheme(args, settings, net))
    else:
        formulation = FORMULATIONS[args.formulation](net, settings.formulation)
    solution = formulation.solve(settings.solver)
    if not solution.is_optimal:
        raise SolverFailedError(args.formulation, solution.status)
    settings.output_dir.mkdir(parents=True, exist_ok=True)
    path = settings.output_dir / f"dispatch_{args.formulation}.csv"
    solution.to_frame(net).to_csv(path, index=False)
    print(f"{args.formulation}: cost {solution.generation_cost:.1f}")
    for scheme in solution.schemes:
        print(f"{scheme} ({scheme.trip_capacity_mw(net):.1f} MW)")
    print(path)
    return EXIT_OK


def cmd_critical(args, settings: Settings) -> int:
    net = settings.load_network()
    opf = FORMULATIONS["opf"](net, settings.formulation).solve(settings.solver)
    report = ExperimentReport("critical", critical=find_critical_contingencies(net, opf))
    print(report.critical.to_string(index=False))
    _write(report, settings)
    return EXIT_OK


def cmd_compare(args, settings: Settings) -> int:
    net = settings.load_network()
    report = compare_formulations(
        net,
        settings.formulation,
        settings.solver,
        settings.cascade,
        workers=settings.workers,
    )
    print(report.table2().to_string(index=False))
    _write(report, settings)
    return EXIT_OK


def cmd_cascade(args, settings: Settings) -> int:
    net = settings.load_network()
    dispatch = FORMULATIONS[args.dispatch](net, settings.formulation).solve(settings.solver)
    if not dispatch.is_optimal:
        raise SolverFailedError(args.dispatch, dispatch.status)
    contingency = as_contingency(args.outage)
    schemes = dispatch.schemes if args.dispatch == "ras-scopf" else ()
    label = f"{args.dispatch}_{contingency.name}"
    result = run_cascade(net, dispatch, schemes, contingency, settings.cascade, label)
    settings.output_dir.mkdir(parents=True, exist_ok=True)
    path = settings.output_dir / f"trace_{label}.csv"
    result.to_csv(path)
    print(f"outage {contingency}: {result.status.value}, {result.total_load_shed_mw:.1f} MW shed")
    print(path)
    return EXIT_OK


def cmd_sensitivity(args, settings: Settings) -> int:
    net = settings.load_network()
    spec = settings.scenarios
    overrides = {
        k: v for k, v in (("count", args.count), ("seed", args.seed)) if v is not None
    }
    if args.distribution:
        spec = ScenarioSpec.named(
            args.distribution, seed=spec.seed, count=spec.count, total_load_mw=spec.total_load_mw
        )
    if args.low is not None or args.high is not None:
        overrides.update(
            low=args.low if args.low is not None else spec.low,
            high=args.high if args.high is not None else spec.high,
            name="custom",
        )
    if overrides:
        spec = replace(spec, **overrides)
    scheme = _scheme(args, settings, net)
    report = sensitivity_study(
        net,
        scheme,
        spec,
        settings.formulation,
        settings.solver,
        settings.cascade,
        contingencies=args.contingency,
        workers=settings.workers,
    )
    for key, value in report.summary().items():
        print(f"{key}: {value}")
    _write(report, settings)
    return EXIT_OK


def cmd_export_mps(args, settings: Settings) -> int:
    net = settings.load_network()
    if args.formulation == RASAwareSCOPF.name:
        model = RASAwareSCOPF(net, settings.formulation, _scheme(args, settings, net)).build()
    else:
        model = FORMULATIONS[args.formulation](net, settings.formulation).build()
    path = Path(args.out) if args.out else settings.output_dir / f"{args.formulation}.mps"
    path.parent.mkdir(parents=True, exist_ok=True)
    print(export_mps(model, path))
    return EXIT_OK


COMMANDS = {
    "prepare-case": cmd_prepare_case,
    "solve": cmd_solve,
    "critical-contingencies": cmd_critical,
    "compare": cmd_compare,
    "cascade": cmd_cascade,
    "sensitivity": cmd_sensitivity,
    "export-mps": cmd_export_mps,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Runs one subcommand.

    Returns:
        int: 0 on success, 2 usage, 3 I/O, 4 invalid case or configuration,
            5 solver failure, 6 consistency or cascade error, 1 otherwise.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    _configure_logging(args)

    try:
        settings = _settings(args)
        return COMMANDS[args.command](args, settings)
    except (CaseFormatError, NetworkValidationError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolverFailedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConsistencyError, CascadeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except Exception as exc:
        logger.exception("Unhandled error in %s", args.command)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
