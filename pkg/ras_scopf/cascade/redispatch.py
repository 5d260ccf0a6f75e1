"""Island rebalancing after topology changes, generator trips and RAS action."""

import logging
from typing import Iterable, Mapping, Optional

import numpy as np

from ras_scopf.core.network import Network
from ras_scopf.cascade.state import SystemState
from ras_scopf.core.utils import to_mw, to_pu
from ras_scopf.miqp.model import MipModel, Sense
from ras_scopf.miqp.options import SolverOptions
from ras_scopf.miqp.solve import solve_model

logger = logging.getLogger(__name__)

REDISPATCH_BIG_M_PU = 100.0  # Droop relaxation once a unit trips
ZERO_MW = 1e-9  # Outputs and loads below this are reported as exact zeros


def _blackout(net: Network, state: SystemState, island) -> SystemState:
    result = state.copy()
    for gen in net.generators:
        if gen.bus in island:
            result.generator_status[gen.id] = False
            result.generation_mw[gen.id] = 0.0
    for bus_id in island:
        result.load_mw[bus_id] = 0.0
    return result


def build_redispatch_model(
    net: Network,
    state: SystemState,
    island: Iterable[int],
    participation: Optional[Mapping[int, float]] = None,
) -> MipModel:
    """
    Builds the island redispatch MILP in p.u. on ``net.base_mva``.

    Minimizes shed load in p.u. plus the number of tripped generators, so one
    trip weighs as much as shedding one base unit of load. Online units may
    stay online (never restart); while online they follow
    ``pg = pg_now + K * s`` for a common free signal ``s``, enforced with a
    big-M pair that relaxes once the unit trips. Load can only be reduced.
    """
    island = sorted(set(island))
    members = set(island)
    base = net.base_mva
    factors = participation if participation is not None else net.participation()
    m = MipModel(f"redispatch_{island[0]}")

    balance = {}
    for gen in net.generators:
        if gen.bus not in members:
            continue
        pg, z = f"pg[{gen.id}]", f"z[{gen.id}]"
        m.add_variable(pg, 0.0, to_pu(gen.p_max_mw, base))
        m.add_binary(z)
        if not state.generator_status[gen.id]:
            m.set_bounds(z, 0.0, 0.0)
        m.add_objective_linear(z, -1.0)
        m.add_objective_constant(1.0)
        balance[pg] = 1.0

    if balance:
        m.add_variable("s", -np.inf, np.inf)
    for gen in net.generators:
        if gen.bus not in members:
            continue
        pg, z = f"pg[{gen.id}]", f"z[{gen.id}]"
        now = to_pu(state.generation_mw[gen.id], base)
        m.add_constraint({pg: 1.0, z: -to_pu(gen.p_max_mw, base)}, Sense.LE, 0.0, name=f"pmax[{gen.id}]")
        m.add_constraint({pg: 1.0, z: -to_pu(gen.p_min_mw, base)}, Sense.GE, 0.0, name=f"pmin[{gen.id}]")
        droop = {pg: 1.0, "s": -factors.get(gen.id, 0.0)}
        big_m = REDISPATCH_BIG_M_PU
        m.add_constraint({**droop, z: big_m}, Sense.LE, now + big_m, name=f"droopup[{gen.id}]")
        m.add_constraint({**droop, z: -big_m}, Sense.GE, now - big_m, name=f"drooplo[{gen.id}]")

    for bus_id in island:
        pd_name = f"pd[{bus_id}]"
        served = to_pu(state.load_mw[bus_id], base)
        m.add_variable(pd_name, 0.0, served)
        m.add_objective_linear(pd_name, -1.0)
        m.add_objective_constant(served)
        balance[pd_name] = -1.0
    m.add_constraint(balance, Sense.EQ, 0.0, name="balance")
    return m


def redispatch_island(
    net: Network,
    state: SystemState,
    island: Iterable[int],
    options: Optional[SolverOptions] = None,
    participation: Optional[Mapping[int, float]] = None,
) -> SystemState:
    """
    Rebalances one island by droop redispatch, generator trips and load shed.

    Args:
        net (Network): The network.
        state (SystemState): Current state; left untouched.
        island (Iterable[int]): Bus ids of an island from ``find_islands``.
        options (SolverOptions, optional): MILP backend; HiGHS by default.
        participation (Mapping, optional): Droop factors; defaults to the
            factors stored on the network.

    Returns:
        SystemState: A new state with the island balanced. Islands without
            online generation shed all their load; islands whose MILP is
            infeasible are blacked out.

    Raises:
        SolverFailedError: If the MILP backend fails without a certified status.
    """
    island = frozenset(island)
    online = [
        g for g in net.generators if g.bus in island and state.generator_status[g.id] and g.p_max_mw > 0
    ]
    if not online:
        if state.island_load_mw(island) > 0:
            logger.info("Island %s has no online generation; shedding its load", sorted(island))
        return _blackout(net, state, island)

    model = build_redispatch_model(net, state, island, participation)
    solution = solve_model(model, options or SolverOptions(backend="highs"))
    if not solution.is_optimal:
        logger.warning(
            "Redispatch of island %s ended %s; blacking out the island",
            sorted(island),
            solution.status.value,
        )
        return _blackout(net, state, island)

    result = state.copy()
    values = solution.assignment
    for gen in net.generators:
        if gen.bus not in island:
            continue
        on = values[f"z[{gen.id}]"] > 0.5
        output = to_mw(values[f"pg[{gen.id}]"], net.base_mva) if on else 0.0
        result.generator_status[gen.id] = on
        result.generation_mw[gen.id] = 0.0 if abs(output) < ZERO_MW else output
    for bus_id in island:
        served = min(max(to_mw(values[f"pd[{bus_id}]"], net.base_mva), 0.0), state.load_mw[bus_id])
        result.load_mw[bus_id] = 0.0 if served < ZERO_MW else served
    return result.validate()
