"""Experiment drivers: critical contingencies, formulation comparison, RAS design
and the load-sensitivity study.

Cascades and scenarios are evaluated on a thread pool. Results are gathered
in submission order, so reports are identical whatever the worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, TypeVar, Union

from ras_scopf.cascade.simulator import CascadeOptions, run_cascade
from ras_scopf.core.dcpf import OVERLOAD_TOL, injection_vector, overloaded_lines, solve_network
from ras_scopf.core.errors import ImbalanceError, RasScopfError, SingularNetworkError, SolverFailedError
from ras_scopf.core.network import Contingency, Network, non_radial_contingencies
from ras_scopf.core.utils import round_percent
from ras_scopf.experiments.reports import (
    COST_COLUMNS,
    CRITICAL_COLUMNS,
    ExperimentReport,
    cascade_row,
    rows_frame,
)
from ras_scopf.experiments.scenarios import ScenarioSpec, generate_scenarios
from ras_scopf.formulations import FORMULATIONS, DispatchSolution, FormulationConfig, RasScheme
from ras_scopf.formulations.ras_aware_scopf import RASAwareSCOPF
from ras_scopf.formulations.ras_scopf import RASSCOPF
from ras_scopf.formulations.scheme import as_contingency
from ras_scopf.miqp.options import SolverOptions

logger = logging.getLogger(__name__)

COMPARED_FORMULATIONS = ("opf", "ras-scopf", "scopf")
DISPATCH_BALANCE_TOL_MW = 1e-2  # Solver residual accepted when re-solving a dispatch
DEFAULT_WORKERS = 1

T = TypeVar("T")


def _ordered_map(func: Callable[..., T], jobs: Sequence[tuple], workers: int) -> List[T]:
    if workers <= 1 or len(jobs) <= 1:
        return [func(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(func, *job) for job in jobs]
        return [f.result() for f in futures]


def _generation(dispatch: Union[DispatchSolution, Mapping[int, float]]) -> Dict[int, float]:
    if isinstance(dispatch, DispatchSolution):
        if not dispatch.is_optimal:
            raise SolverFailedError(f"{dispatch.formulation} dispatch", dispatch.status)
        return dispatch.generation_mw
    return dict(dispatch)


def _contingency_filter(values) -> Optional[set]:
    if values is None:
        return None
    return {as_contingency(v) for v in values}


def find_critical_contingencies(
    net: Network,
    dispatch: Union[DispatchSolution, Mapping[int, float]],
    contingencies: Optional[Iterable] = None,
    tol: float = OVERLOAD_TOL,
):
    """
    Lists the post-contingency overloads of a dispatch.

    Line outages leave the injections unchanged, so the intermediate-stage
    flows are the DC flows of the dispatch on the outaged topology.

    Args:
        net (Network): The prepared network.
        dispatch (DispatchSolution or Mapping): Usually the OPF dispatch.
        contingencies (Iterable, optional): Outages to scan; every
            non-radial single line outage by default.
        tol (float): Relative exceedance that counts as an overload.

    Returns:
        pd.DataFrame: Columns outage, overloaded_line, loading_pct (2
            decimals), sorted by outage then descending loading.
    """
    generation = _generation(dispatch)
    inj = injection_vector(net, generation)
    if contingencies is None:
        scanned = non_radial_contingencies(net)
    else:
        scanned = sorted({as_contingency(c) for c in contingencies}, key=lambda c: c.sort_key)
    rows = []
    for contingency in scanned:
        try:
            _, flows = solve_network(net, contingency.outaged_lines, inj, DISPATCH_BALANCE_TOL_MW)
        except (ImbalanceError, SingularNetworkError) as exc:
            logger.warning("Skipping outage %s in the critical scan: %s", contingency, exc)
            continue
        for line_id, loading in overloaded_lines(flows, net, tol):
            rows.append(
                {
                    "outage": contingency.name,
                    "overloaded_line": line_id,
                    "loading_pct": round_percent(loading),
                }
            )
    logger.info("Critical scan over %d outages found %d overloads", len(scanned), len(rows))
    return rows_frame(rows, CRITICAL_COLUMNS)


def design_scheme(
    net: Network,
    cfg: Optional[FormulationConfig] = None,
    options: Optional[SolverOptions] = None,
) -> Tuple[RasScheme, DispatchSolution]:
    """
    Designs the trip set of the first configured scheme with RAS-SCOPF.

    Raises:
        SolverFailedError: If RAS-SCOPF does not solve to optimality.
    """
    cfg = cfg or FormulationConfig.case_study()
    solution = RASSCOPF(net, cfg).solve(options)
    if not solution.is_optimal or solution.scheme is None:
        raise SolverFailedError("RAS-SCOPF design", solution.status)
    scheme = solution.scheme
    logger.info(
        "Designed %s (%.1f MW tripped capacity)", scheme, scheme.trip_capacity_mw(net)
    )
    return scheme, solution


def _cascade_job(net, generation, schemes, contingency, options, label):
    return run_cascade(net, generation, schemes, contingency, options, label)


def compare_formulations(
    net: Network,
    cfg: Optional[FormulationConfig] = None,
    options: Optional[SolverOptions] = None,
    cascade_options: Optional[CascadeOptions] = None,
    contingencies: Optional[Iterable] = None,
    workers: int = DEFAULT_WORKERS,
) -> ExperimentReport:
    """
    Solves OPF, RAS-SCOPF and SCOPF and stresses each dispatch with cascades.

    A formulation that fails to solve is recorded with its status or error
    and skipped for the cascade runs; the others proceed. The cascade set is
    the outages of the critical scan on the OPF dispatch unless
    ``contingencies`` is given. The designed scheme is armed only for the
    RAS-SCOPF dispatch.

    Returns:
        ExperimentReport: Costs (with percent increase over OPF), the critical
            scan, one cascade row per (formulation, outage) and all traces.
    """
    cfg = cfg or FormulationConfig.case_study()
    report = ExperimentReport("compare")
    errors: Dict[str, str] = {}
    for name in COMPARED_FORMULATIONS:
        try:
            report.dispatches[name] = FORMULATIONS[name](net, cfg).solve(options)
        except RasScopfError as exc:
            logger.error("%s failed on %s: %s", name, net.name, exc)
            errors[name] = str(exc)

    reference = report.dispatches.get("opf")
    if reference is not None and not reference.is_optimal:
        reference = None
    cost_rows = []
    for name in COMPARED_FORMULATIONS:
        solution = report.dispatches.get(name)
        optimal = solution is not None and solution.is_optimal
        cost_rows.append(
            {
                "formulation": name,
                "status": solution.status.value if solution is not None else "error",
                "cost": solution.generation_cost if optimal else float("nan"),
                "increase_pct": (
                    round_percent(solution.cost_increase(reference))
                    if optimal and reference is not None
                    else float("nan")
                ),
                "error": errors.get(name, ""),
            }
        )
    report.costs = rows_frame(cost_rows, COST_COLUMNS)

    if reference is not None:
        report.critical = find_critical_contingencies(net, reference)
    if contingencies is not None:
        outages = sorted({as_contingency(c) for c in contingencies}, key=lambda c: c.sort_key)
    else:
        outages = sorted(
            {Contingency(frozenset(int(l) for l in o.split("+"))) for o in report.critical["outage"]},
            key=lambda c: c.sort_key,
        )

    jobs, meta = [], []
    for name in COMPARED_FORMULATIONS:
        solution = report.dispatches.get(name)
        if solution is None or not solution.is_optimal:
            continue
        schemes = solution.schemes if name == "ras-scopf" else ()
        for contingency in outages:
            label = f"{name}_{contingency.name}"
            jobs.append((net, solution.generation_mw, schemes, contingency, cascade_options, label))
            meta.append((name, label))
    results = _ordered_map(_cascade_job, jobs, workers)

    rows = []
    for (name, label), result in zip(meta, results):
        rows.append(cascade_row(result, name, cfg.monitored_lines))
        report.traces[label] = result
    report.cascades = rows_frame(rows, report.cascades.columns)
    logger.info("Compared %d formulations over %d outages", len(report.dispatches), len(outages))
    return report


def _scenario_job(index, net, loads, scheme, cfg, options, cascade_options, outages):
    scenario_net = net.with_loads(loads)
    row = {"scenario": index, "feasible": False, "status": "error", "cost": float("nan"), "error": ""}
    try:
        dispatch = RASAwareSCOPF(scenario_net, cfg, scheme).solve(options)
    except RasScopfError as exc:
        logger.warning("Scenario %d: RAS-aware SCOPF raised %s", index, exc)
        row["error"] = str(exc)
        return row, []
    row["status"] = dispatch.status.value
    if not dispatch.is_optimal:
        logger.warning("Scenario %d discarded: RAS-aware SCOPF %s", index, dispatch.status.value)
        return row, []
    row["feasible"] = True
    row["cost"] = dispatch.generation_cost

    results = []
    for contingency in outages:
        label = f"s{index:03d}_{contingency.name}"
        try:
            results.append(
                run_cascade(scenario_net, dispatch, [scheme], contingency, cascade_options, label)
            )
        except RasScopfError as exc:
            logger.error("Scenario %d outage %s: cascade raised %s", index, contingency, exc)
            row["error"] = str(exc)
    return row, results


def sensitivity_study(
    net: Network,
    scheme: RasScheme,
    spec: ScenarioSpec,
    cfg: Optional[FormulationConfig] = None,
    options: Optional[SolverOptions] = None,
    cascade_options: Optional[CascadeOptions] = None,
    contingencies: Optional[Iterable] = None,
    workers: int = DEFAULT_WORKERS,
) -> ExperimentReport:
    """
    Tests a fixed scheme against randomized load scenarios.

    Each scenario is dispatched with the RAS-aware SCOPF. Scenarios it cannot
    solve are marked infeasible and get no cascade runs. Feasible ones are
    stressed with every contingency the scheme protects, or the subset named
    in ``contingencies``.

    Args:
        net (Network): The prepared network.
        scheme (RasScheme): The scheme with its designed trip set.
        spec (ScenarioSpec): Scenario distribution, count and seed.
        cfg (FormulationConfig, optional): Penalties and balancing set; its
            schemes are replaced by ``scheme``.
        options (SolverOptions, optional): Backend for the dispatch solves.
        cascade_options (CascadeOptions, optional): Simulator settings.
        contingencies (Iterable, optional): Restricts the cascade set, e.g.
            ``[7]`` for the line-7-only view.
        workers (int): Scenarios evaluated in parallel.

    Returns:
        ExperimentReport: Scenario rows, cascade rows and the traces of
            failing cascades.
    """
    cfg = (cfg or FormulationConfig.case_study()).with_schemes([scheme])
    wanted = _contingency_filter(contingencies)
    outages = sorted(
        (k for k in scheme.protected if wanted is None or k in wanted), key=lambda c: c.sort_key
    )
    scenarios = generate_scenarios(net, spec)
    jobs = [
        (index, net, loads, scheme, cfg, options, cascade_options, outages)
        for index, loads in enumerate(scenarios)
    ]
    outcomes = _ordered_map(_scenario_job, jobs, workers)

    report = ExperimentReport(f"sensitivity-{spec.name}")
    scenario_rows, cascade_rows = [], []
    for row, results in outcomes:
        scenario_rows.append(row)
        for result in results:
            cascade_rows.append(cascade_row(result, RASAwareSCOPF.name, scheme.monitored_lines, row["scenario"]))
            if result.failed:
                report.traces[result.label] = result
    report.scenarios = rows_frame(scenario_rows, report.scenarios.columns)
    report.cascades = rows_frame(cascade_rows, report.cascades.columns)
    summary = report.summary()
    logger.info(
        "Sensitivity %s: %d/%d feasible, %d failing scenarios, %.1f MW shed",
        spec.name,
        summary["feasible"],
        summary["scenarios"],
        summary["failing_scenarios"],
        summary["total_shed_mw"],
    )
    return report
