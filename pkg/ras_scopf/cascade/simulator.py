"""Cascading failure simulator with RAS action.

Each pass of the loop finds the islands of the surviving topology, stops if
the system has failed, rebalances islands, solves the DC power flow, lets
untriggered schemes act on overloads of their monitored lines and finally
trips the single most overloaded eligible line. The loop ends when no
eligible line is overloaded.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Mapping, Optional, Sequence, Union

from ras_scopf.cascade.redispatch import redispatch_island
from ras_scopf.cascade.state import (
    CascadeEvent,
    CascadeResult,
    CascadeStatus,
    EventKind,
    SystemState,
)
from ras_scopf.core.dcpf import OVERLOAD_TOL, FlowSolution, injection_vector, overloaded_lines, solve_network
from ras_scopf.core.errors import CascadeError, ConfigError
from ras_scopf.core.network import Contingency, Network, find_islands
from ras_scopf.formulations.scheme import RasScheme
from ras_scopf.formulations.solution import DispatchSolution
from ras_scopf.miqp.options import SolverOptions

logger = logging.getLogger(__name__)
trace_logger = logging.getLogger("ras_scopf.cascade.trace")

FAILURE_FRACTION = 0.10  # Share of buses outside the largest island that counts as system failure
BALANCE_TOL_MW = 1e-5  # Island imbalance tolerated before a redispatch is run
EVENT_MW_TOL = 1e-6  # Smaller shed or redispatch amounts are not recorded


@dataclass
class CascadeOptions:
    """Simulator settings.

    Attributes:
        max_steps (int, optional): Loop passes allowed; ``None`` means twice
            the number of lines.
        failure_fraction (float): System failure threshold.
        overload_tol (float): Relative exceedance that counts as an overload.
        balance_tol (float): Island imbalance in MW tolerated without redispatch.
        solver (SolverOptions): Backend for the island redispatch MILP.
    """

    max_steps: Optional[int] = None
    failure_fraction: float = FAILURE_FRACTION
    overload_tol: float = OVERLOAD_TOL
    balance_tol: float = BALANCE_TOL_MW
    solver: SolverOptions = field(default_factory=lambda: SolverOptions(backend="highs"))

    def __post_init__(self):
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps must be >= 1")
        if not 0 < self.failure_fraction <= 1:
            raise ConfigError("failure_fraction must be in (0, 1]")


def check_system_failure(
    net: Network, islands: Sequence[Iterable[int]], fraction: float = FAILURE_FRACTION
) -> bool:
    """True iff at least ``fraction`` of the buses lie outside the largest island."""
    total = len(net.buses)
    largest = max((len(set(i)) for i in islands), default=0)
    return (total - largest) >= fraction * total - 1e-12


def check_ras_trigger(
    state: SystemState,
    flows: FlowSolution,
    scheme: RasScheme,
    net: Network,
    tol: float = OVERLOAD_TOL,
) -> bool:
    """True iff the scheme has not fired yet and one of its monitored lines is overloaded."""
    if state.ras_triggered.get(scheme.name, False):
        return False
    return any(scheme.monitors(line_id) for line_id, _ in overloaded_lines(flows, net, tol))


def apply_ras(state: SystemState, scheme: RasScheme) -> SystemState:
    """
    Trips the scheme's generators and marks it triggered.

    Returns:
        SystemState: A new state; balancing is left to ``redispatch_island``.

    Raises:
        CascadeError: If the scheme already fired in this run.
    """
    if state.ras_triggered.get(scheme.name, False):
        raise CascadeError(f"RAS {scheme.name} has already been triggered")
    result = state.copy()
    for gen_id in scheme.trip_set:
        result.generator_status[gen_id] = False
        result.generation_mw[gen_id] = 0.0
    result.ras_triggered[scheme.name] = True
    return result


def select_trip(
    flows: FlowSolution,
    net: Network,
    schemes: Iterable[RasScheme],
    state: SystemState,
    tol: float = OVERLOAD_TOL,
) -> Optional[int]:
    """
    Picks the line the inverse-time protection trips next.

    Lines monitored by a scheme that has not fired yet are skipped.

    Returns:
        int or None: The most overloaded eligible line, lowest id on ties.
    """
    deferred = {
        line_id
        for scheme in schemes
        if not state.ras_triggered.get(scheme.name, False)
        for line_id in scheme.monitored_lines
    }
    for line_id, _ in overloaded_lines(flows, net, tol):
        if line_id not in deferred:
            return line_id
    return None


class CascadeSimulator:
    """
    One cascade run over a shared network.

    The simulator owns its SystemState and event list; the network and
    schemes are only read, so many simulators can run side by side.
    """

    def __init__(
        self,
        net: Network,
        generation: Mapping[int, float],
        schemes: Sequence[RasScheme] = (),
        options: Optional[CascadeOptions] = None,
        label: str = "",
    ):
        self.net = net
        self.schemes = tuple(schemes)
        self.options = options or CascadeOptions()
        self.label = label
        self.state = SystemState.from_dispatch(net, generation, [s.name for s in self.schemes])
        self.events: List[CascadeEvent] = []
        self.contingency: Optional[Contingency] = None

    def _emit(self, kind: EventKind, elements=(), mw: float = 0.0, detail: str = "") -> None:
        event = CascadeEvent(len(self.events) + 1, kind, tuple(elements), max(0.0, float(mw)), detail)
        self.events.append(event)
        trace_logger.info(
            "run=%s contingency=%s step=%d kind=%s element=%s mw=%.3f%s",
            self.label or "-",
            self.contingency,
            event.step,
            event.kind.value,
            event.element or "-",
            event.mw,
            f" detail={detail}" if detail else "",
        )

    def _imbalance(self, island) -> float:
        return self.state.island_generation_mw(self.net, island) - self.state.island_load_mw(island)

    def _rebalance(self, island) -> None:
        before = self.state
        after = redispatch_island(self.net, before, island, self.options.solver)
        for gen in self.net.generators:
            if gen.bus in island and before.generator_status[gen.id] and not after.generator_status[gen.id]:
                self._emit(EventKind.GENERATOR_TRIP, (gen.id,), before.generation_mw[gen.id])
        shed_buses = [b for b in sorted(island) if before.load_mw[b] - after.load_mw[b] > EVENT_MW_TOL]
        shed = sum(before.load_mw[b] - after.load_mw[b] for b in shed_buses)
        if shed_buses:
            self._emit(EventKind.LOAD_SHED, shed_buses, shed)
        moved = [
            g.id
            for g in self.net.generators
            if g.bus in island
            and after.generator_status[g.id]
            and abs(after.generation_mw[g.id] - before.generation_mw[g.id]) > EVENT_MW_TOL
        ]
        if moved:
            self._emit(
                EventKind.REDISPATCH,
                moved,
                sum(abs(after.generation_mw[g] - before.generation_mw[g]) for g in moved),
            )
        self.state = after

    def _rebalance_all(self, islands) -> None:
        for island in islands:
            if abs(self._imbalance(island)) > self.options.balance_tol:
                self._rebalance(island)

    def _flows(self) -> FlowSolution:
        inj = injection_vector(self.net, self.state.generation_mw, self.state.load_mw)
        _, flows = solve_network(
            self.net, self.state.outaged_lines, inj, balance_tol=self.options.balance_tol * len(self.net.buses)
        )
        return flows

    def _finish(self, status: CascadeStatus, islands) -> CascadeResult:
        shed = sum(self.state.demand_mw.values()) - self.state.total_load_served_mw
        result = CascadeResult(
            contingency=self.contingency,
            status=status,
            events=list(self.events),
            islands=list(islands),
            total_load_shed_mw=max(0.0, shed),
            final_state=self.state,
            label=self.label,
        )
        logger.info(
            "Cascade %s after outage %s: %s, %d events, %.1f MW shed",
            self.label or "-",
            self.contingency,
            status.value,
            len(self.events),
            result.total_load_shed_mw,
        )
        return result

    def run(self, init: Contingency) -> CascadeResult:
        """
        Runs the cascade that follows ``init``.

        Returns:
            CascadeResult: Ends quiescent, in system failure, or with status
                ``max-steps`` when the pass budget is exhausted.
        """
        if self.contingency is not None:
            raise CascadeError("a CascadeSimulator runs a single cascade")
        for line_id in init.outaged_lines:
            self.net.line(line_id)
        self.contingency = init
        max_steps = self.options.max_steps or 2 * len(self.net.lines)
        tol = self.options.overload_tol

        self._emit(EventKind.INITIATING_OUTAGE, sorted(init.outaged_lines))
        for line_id in init.outaged_lines:
            self.state.line_status[line_id] = False

        known = find_islands(self.net, ())
        islands = known
        for _ in range(max_steps):
            islands = find_islands(self.net, self.state.outaged_lines)
            for island in islands:
                if island not in known and len(islands) > 1:
                    self._emit(EventKind.ISLAND_FORMED, sorted(island), self.state.island_load_mw(island))
            known = islands

            if check_system_failure(self.net, islands, self.options.failure_fraction):
                self._rebalance_all(islands)
                self._emit(EventKind.SYSTEM_FAILURE, (), self.state.total_shed_mw)
                return self._finish(CascadeStatus.SYSTEM_FAILURE, islands)

            self._rebalance_all(islands)
            flows = self._flows()

            fired = False
            for scheme in self.schemes:
                if check_ras_trigger(self.state, flows, scheme, self.net, tol):
                    before = self.state
                    self.state = apply_ras(before, scheme)
                    self._emit(EventKind.RAS_TRIGGERED, sorted(scheme.monitored_lines), detail=scheme.name)
                    for gen_id in sorted(scheme.trip_set):
                        if before.generator_status[gen_id]:
                            self._emit(EventKind.GENERATOR_TRIP, (gen_id,), before.generation_mw[gen_id])
                    fired = True
            if fired:
                self._rebalance_all(islands)
                flows = self._flows()

            line_id = select_trip(flows, self.net, self.schemes, self.state, tol)
            if line_id is None:
                self._emit(EventKind.QUIESCENT)
                return self._finish(CascadeStatus.QUIESCENT, islands)
            self.state.line_status[line_id] = False
            self._emit(EventKind.LINE_TRIP, (line_id,), abs(flows.flows[line_id]))

        logger.warning(
            "Cascade %s after outage %s exceeded %d passes", self.label or "-", init, max_steps
        )
        return self._finish(CascadeStatus.MAX_STEPS, islands)


def run_cascade(
    net: Network,
    dispatch: Union[DispatchSolution, Mapping[int, float]],
    schemes: Sequence[RasScheme],
    init: Contingency,
    opts: Optional[CascadeOptions] = None,
    label: str = "",
) -> CascadeResult:
    """
    Simulates the cascade started by ``init`` from a pre-contingency dispatch.

    Args:
        net (Network): The network, loads set to the scenario being studied.
        dispatch (DispatchSolution or Mapping): Pre-contingency dispatch or a
            generator id -> MW map.
        schemes (Sequence[RasScheme]): Armed schemes with their trip sets.
        init (Contingency): The initiating outage.
        opts (CascadeOptions, optional): Simulator settings.
        label (str): Run label for logs and traces.

    Returns:
        CascadeResult: The trace and outcome.
    """
    generation = dispatch.generation_mw if isinstance(dispatch, DispatchSolution) else dispatch
    return CascadeSimulator(net, generation, schemes, opts, label).run(init)
