import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Tuple

import pandas as pd

from ras_scopf.core.dcpf import OVERLOAD_TOL, injection_vector, solve_network
from ras_scopf.core.errors import ConsistencyError, ImbalanceError, SingularNetworkError
from ras_scopf.core.network import Contingency, Network
from ras_scopf.formulations.config import FormulationConfig
from ras_scopf.formulations.scheme import RasScheme
from ras_scopf.formulations.variables import (
    INTERMEDIATE,
    POST_RAS,
    PRE,
    dlt_name,
    pd_name,
    pg_name,
    r_name,
    stage_key,
    th_name,
    trigger_name,
    y_name,
    zg_name,
    zgj_name,
)
from ras_scopf.miqp.model import MipModel
from ras_scopf.miqp.solution import MipSolution, SolveStatus

logger = logging.getLogger(__name__)

CONSISTENCY_TOL_PU = 1e-6  # Allowed gap between extracted flows and a DC power flow re-solve
ONLINE_THRESHOLD = 0.5  # Status binaries above this read as 1

STAGE_PRE = "pre"
STAGE_INTERMEDIATE = "intermediate"
STAGE_POST_RAS = "post-ras"


@dataclass
class StageState:
    """Operating point of one stage of a solved formulation, in MW and radians.

    Attributes:
        stage (str): ``pre``, ``intermediate`` or ``post-ras``.
        contingency (Contingency, optional): None for the pre-contingency stage.
        generation_mw (dict): Generator id -> output.
        load_mw (dict): Bus id -> load served.
        angles (dict): Bus id -> angle.
        flows_mw (dict): Line id -> flow on every surviving line.
        generator_online (dict): Generator id -> status.
        droop_signal_mw (float): The free droop signal of the stage.
        mismatch_mw (float): Part of the droop signal not explained by lost
            generation minus shed load.
    """

    stage: str
    contingency: Optional[Contingency]
    generation_mw: Dict[int, float]
    load_mw: Dict[int, float]
    angles: Dict[int, float]
    flows_mw: Dict[int, float]
    generator_online: Dict[int, bool]
    droop_signal_mw: float = 0.0
    mismatch_mw: float = 0.0

    @property
    def outaged_lines(self) -> frozenset:
        return frozenset() if self.contingency is None else self.contingency.outaged_lines

    @property
    def total_generation_mw(self) -> float:
        return float(sum(self.generation_mw.values()))

    @property
    def total_load_mw(self) -> float:
        return float(sum(self.load_mw.values()))

    def loading(self, net: Network) -> Dict[int, float]:
        return {l: abs(f) / net.line(l).rating_mw for l, f in self.flows_mw.items()}

    def overloaded(self, net: Network, tol: float = OVERLOAD_TOL) -> List[Tuple[int, float]]:
        found = [(l, v) for l, v in self.loading(net).items() if v > 1.0 + tol]
        return sorted(found, key=lambda item: (-item[1], item[0]))


@dataclass
class TriggerState:
    """Trigger binaries of one scheme under one protected contingency."""

    scheme: str
    contingency: Contingency
    positive: Dict[int, int]
    negative: Dict[int, int]
    overloaded: Dict[int, int]
    triggered: bool


@dataclass
class DispatchSolution:
    """Typed result of a formulation solve.

    Attributes:
        formulation (str): ``opf``, ``scopf``, ``ras-scopf`` or ``ras-aware-scopf``.
        status (SolveStatus): Solver status; the stage fields are only filled
            when it is optimal.
        objective (float): Model objective in $.
        generation_cost (float): Pre-contingency generation cost in $.
        pre (StageState): Pre-contingency stage.
        intermediate (dict): Contingency -> intermediate stage.
        post_ras (dict): Protected contingency -> post-RAS stage.
        triggers (dict): Protected contingency -> trigger binaries.
        schemes (tuple): Designed schemes (RAS-SCOPF) or the fixed scheme
            (RAS-aware SCOPF).
        reserves_mw (dict): Generator id -> reserve (RAS-aware SCOPF only).
    """

    formulation: str
    status: SolveStatus
    objective: float = float("nan")
    generation_cost: float = float("nan")
    pre: Optional[StageState] = None
    intermediate: Dict[Contingency, StageState] = field(default_factory=dict)
    post_ras: Dict[Contingency, StageState] = field(default_factory=dict)
    triggers: Dict[Contingency, TriggerState] = field(default_factory=dict)
    schemes: Tuple[RasScheme, ...] = ()
    reserves_mw: Dict[int, float] = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    @property
    def scheme(self) -> Optional[RasScheme]:
        return self.schemes[0] if self.schemes else None

    @property
    def generation_mw(self) -> Dict[int, float]:
        return {} if self.pre is None else dict(self.pre.generation_mw)

    def shed_mw(self, net: Network, contingency: Contingency) -> float:
        state = self.post_ras.get(contingency)
        if state is None:
            return 0.0
        return float(sum(max(0.0, net.loads[b] - v) for b, v in state.load_mw.items()))

    def total_shed_mw(self, net: Network) -> float:
        return float(sum(self.shed_mw(net, k) for k in self.post_ras))

    def cost_increase(self, reference: "DispatchSolution") -> float:
        """Relative increase of the generation cost over ``reference`` (0.0292 for 2.92%)."""
        return (self.generation_cost - reference.generation_cost) / reference.generation_cost

    def to_frame(self, net: Network) -> pd.DataFrame:
        """Pre-contingency dispatch, one row per generator."""
        rows = [
            {
                "generator": g.id,
                "bus": g.bus,
                "p_mw": self.generation_mw.get(g.id, 0.0),
                "p_max_mw": g.p_max_mw,
                "cost": g.cost(self.generation_mw.get(g.id, 0.0)),
            }
            for g in net.active_generators()
        ]
        return pd.DataFrame(rows, columns=["generator", "bus", "p_mw", "p_max_mw", "cost"])

    def __repr__(self):
        return (
            f"DispatchSolution({self.formulation}, status={self.status.value}, "
            f"cost={self.generation_cost:.1f}, schemes={[str(s) for s in self.schemes]})"
        )


def _read_stage(values, net, stage, contingency, key, shed, switchable) -> StageState:
    base = net.base_mva
    gens = net.active_generators()
    out = set() if contingency is None else set(contingency.outaged_lines)
    generation = {g.id: values[pg_name(key, g.id)] * base for g in gens}
    if shed:
        load = {b.id: values[pd_name(key, b.id)] * base for b in net.buses}
    else:
        load = net.loads
    angles = {b.id: values[th_name(key, b.id)] for b in net.buses}
    flows = {
        l.id: (angles[l.from_bus] - angles[l.to_bus]) / l.reactance_pu * base
        for l in net.active_lines(out)
    }
    if switchable:
        online = {g.id: values[zg_name(key, g.id)] > ONLINE_THRESHOLD for g in gens}
    else:
        online = {g.id: True for g in gens}
    signal = values.get(dlt_name(key), 0.0) * base
    return StageState(stage, contingency, generation, dict(load), angles, flows, online, signal)


def _check_stage(net: Network, state: StageState, tol: float) -> None:
    inj = injection_vector(net, state.generation_mw, state.load_mw)
    try:
        _, flow = solve_network(net, state.outaged_lines, inj, balance_tol=tol * net.base_mva)
    except (ImbalanceError, SingularNetworkError) as err:
        raise ConsistencyError(
            f"{state.stage} stage {state.contingency or ''}: DC power flow re-solve failed: {err}"
        ) from err
    for line_id, value in state.flows_mw.items():
        deviation = abs(flow.flows[line_id] - value) / net.base_mva
        if deviation > tol:
            raise ConsistencyError(
                f"{state.stage} stage {state.contingency or ''}: line {line_id} flow deviates "
                f"{deviation:.3g} p.u. from the DC power flow"
            )


def extract_solution(
    m: MipModel,
    s: MipSolution,
    net: Network,
    cfg: FormulationConfig,
    formulation: str = "model",
    tol: float = CONSISTENCY_TOL_PU,
) -> DispatchSolution:
    """
    Turns an optimal model assignment into a DispatchSolution.

    Stages and schemes are recovered from the variables present in ``m``, so
    the same routine serves every formulation. Each stage is re-solved with
    the DC power flow and compared with the flows implied by its angles.

    Args:
        m (MipModel): The solved model.
        s (MipSolution): Its optimal solution.
        net (Network): The network the model was built from.
        cfg (FormulationConfig): The configuration the model was built with.
        formulation (str): Label stored on the result.
        tol (float): Consistency tolerance in p.u.

    Returns:
        DispatchSolution: With designed schemes when the model has trip variables.

    Raises:
        ConsistencyError: If ``s`` is not optimal or a stage fails the re-check.
    """
    if not s.is_optimal or not s.has_values:
        raise ConsistencyError(f"cannot extract a dispatch from a {s.status.value} solution")
    values = s.assignment
    gens = net.active_generators()
    first_bus = net.buses[0].id

    pre = _read_stage(values, net, STAGE_PRE, None, PRE, shed=False, switchable=False)
    result = DispatchSolution(
        formulation=formulation,
        status=s.status,
        objective=s.objective,
        generation_cost=float(
            sum(
                g.cost(pre.generation_mw[g.id]) - (0.0 if cfg.include_cost_constant else g.cost_const)
                for g in gens
            )
        ),
        pre=pre,
    )

    for contingency in cfg.contingency_set(net):
        key = stage_key(INTERMEDIATE, contingency)
        if not m.has_variable(th_name(key, first_bus)):
            continue
        state = _read_stage(values, net, STAGE_INTERMEDIATE, contingency, key, False, False)
        state.mismatch_mw = state.droop_signal_mw
        result.intermediate[contingency] = state

        post_key = stage_key(POST_RAS, contingency)
        if not m.has_variable(th_name(post_key, first_bus)):
            continue
        post = _read_stage(values, net, STAGE_POST_RAS, contingency, post_key, True, True)
        lost = sum(state.generation_mw[g] for g, on in post.generator_online.items() if not on)
        shed = sum(net.loads[b] - v for b, v in post.load_mw.items())
        post.mismatch_mw = post.droop_signal_mw - (lost - shed)
        result.post_ras[contingency] = post

    for scheme in cfg.schemes:
        for contingency in sorted(scheme.protected, key=lambda c: c.sort_key):
            name = y_name(scheme.name, contingency)
            if not m.has_variable(name):
                continue
            monitored = sorted(
                l for l in scheme.monitored_lines if m.has_variable(trigger_name("z1", scheme.name, contingency, l))
            )
            def read(which, scheme=scheme, contingency=contingency, monitored=monitored):
                return {
                    l: int(round(values[trigger_name(which, scheme.name, contingency, l)]))
                    for l in monitored
                }

            result.triggers[contingency] = TriggerState(
                scheme.name,
                contingency,
                read("z1"),
                read("z2"),
                read("z3"),
                values[name] > ONLINE_THRESHOLD,
            )

    designed = []
    for scheme in cfg.schemes:
        if gens and m.has_variable(zgj_name(scheme.name, gens[0].id)):
            trip = [g.id for g in gens if values[zgj_name(scheme.name, g.id)] < ONLINE_THRESHOLD]
            designed.append(scheme.with_trip_set(trip))
    result.schemes = tuple(designed)

    if gens and m.has_variable(r_name(gens[0].id)):
        result.reserves_mw = {g.id: values[r_name(g.id)] * net.base_mva for g in gens}

    for state in _stages(result):
        _check_stage(net, state, tol)
    logger.info(
        "%s: generation cost %.1f, %d intermediate and %d post-RAS stages%s",
        formulation,
        result.generation_cost,
        len(result.intermediate),
        len(result.post_ras),
        "".join(f", {s}" for s in result.schemes),
    )
    return result


def _stages(result: DispatchSolution) -> Iterable[StageState]:
    yield result.pre
    yield from result.intermediate.values()
    yield from result.post_ras.values()
