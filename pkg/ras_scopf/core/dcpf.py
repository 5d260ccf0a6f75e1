"""Linear (DC) power flow per island and overload detection."""

import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import numpy as np

from ras_scopf.core.errors import ImbalanceError, SingularNetworkError
from ras_scopf.core.network import Network, find_islands

logger = logging.getLogger(__name__)

BALANCE_TOL_MW = 1e-6  # Allowed net injection over an island before solving
OVERLOAD_TOL = 1e-6  # Relative exceedance required before a line counts as overloaded


@dataclass
class FlowSolution:
    """Angles and flows of one island.

    Attributes:
        island (frozenset): Bus ids of the island.
        island_id (int): Position of the island in ``find_islands`` order.
        reference_bus (int): Bus whose angle is fixed to 0.
        angles (dict): Bus id -> voltage angle in radians.
        flows (dict): Line id -> flow in MW, positive from ``from_bus`` to ``to_bus``.
    """

    island: FrozenSet[int]
    island_id: int = 0
    reference_bus: Optional[int] = None
    angles: Dict[int, float] = field(default_factory=dict)
    flows: Dict[int, float] = field(default_factory=dict)

    def merge(self, other: "FlowSolution") -> "FlowSolution":
        merged = FlowSolution(island=self.island | other.island, island_id=self.island_id)
        merged.reference_bus = self.reference_bus
        merged.angles = {**self.angles, **other.angles}
        merged.flows = {**self.flows, **other.flows}
        return merged


def injection_vector(
    net: Network,
    generation: Mapping[int, float],
    load: Optional[Mapping[int, float]] = None,
) -> np.ndarray:
    """
    Builds the per-bus net injection (generation minus load served) in MW.

    Args:
        net (Network): The network; the vector follows ``net.buses`` order.
        generation (Mapping[int, float]): Generator id -> output in MW.
        load (Mapping[int, float], optional): Bus id -> load served in MW;
            defaults to the network's base loads.
    """
    load = net.loads if load is None else load
    inj = np.zeros(len(net.buses))
    for gen_id, p_mw in generation.items():
        inj[net.bus_position(net.generator(gen_id).bus)] += p_mw
    for bus_id, p_mw in load.items():
        inj[net.bus_position(bus_id)] -= p_mw
    if not np.all(np.isfinite(inj)):
        raise ValueError("injection vector must be finite")
    return inj


def reference_bus(net: Network, island: Iterable[int]) -> int:
    """Lowest-id bus hosting a generator in the island, else the lowest-id bus."""
    island = set(island)
    gen_buses = sorted(g.bus for g in net.generators if g.bus in island)
    return gen_buses[0] if gen_buses else min(island)


def solve_island(
    net: Network,
    out: Iterable[int],
    island: Iterable[int],
    inj: np.ndarray,
    island_id: int = 0,
    balance_tol: float = BALANCE_TOL_MW,
) -> FlowSolution:
    """
    Solves the DC power flow of one island.

    Args:
        net (Network): The network.
        out (Iterable[int]): Outaged line ids.
        island (Iterable[int]): Bus ids of a connected island from ``find_islands``.
        inj (np.ndarray): Net injection in MW per bus, ``net.buses`` order.
        island_id (int): Label stored on the result.
        balance_tol (float): Allowed |sum(inj)| over the island in MW. Any
            residual within the tolerance is absorbed at the reference bus.

    Returns:
        FlowSolution: Angles relative to the reference bus and MW flows on
            every surviving line inside the island.

    Raises:
        ImbalanceError: If the island injections do not sum to zero.
        SingularNetworkError: If the island is not internally connected.
    """
    island = frozenset(island)
    out = set(out)
    buses = sorted(island)
    positions = [net.bus_position(b) for b in buses]
    mismatch = float(np.sum(inj[positions]))
    if abs(mismatch) > balance_tol:
        raise ImbalanceError(
            f"island {island_id} injections sum to {mismatch:.6g} MW (tolerance {balance_tol:g})"
        )

    ref = reference_bus(net, island)
    solution = FlowSolution(island=island, island_id=island_id, reference_bus=ref)
    lines = [l for l in net.active_lines(out) if l.from_bus in island and l.to_bus in island]
    local = {b: i for i, b in enumerate(buses)}

    bmat = np.zeros((len(buses), len(buses)))
    for line in lines:
        i, j = local[line.from_bus], local[line.to_bus]
        inv_x = 1.0 / line.reactance_pu
        bmat[i, i] += inv_x
        bmat[j, j] += inv_x
        bmat[i, j] -= inv_x
        bmat[j, i] -= inv_x

    keep = [i for i, b in enumerate(buses) if b != ref]
    theta = np.zeros(len(buses))
    if keep:
        reduced = bmat[np.ix_(keep, keep)]
        rhs = inj[positions][keep] / net.base_mva
        try:
            theta[keep] = np.linalg.solve(reduced, rhs)
        except np.linalg.LinAlgError:
            raise SingularNetworkError(
                f"island {island_id} susceptance matrix is singular; island is not connected"
            ) from None
        if not np.all(np.isfinite(theta)):
            raise SingularNetworkError(f"island {island_id} produced non-finite angles")

    solution.angles = {b: float(theta[local[b]]) for b in buses}
    solution.flows = {
        l.id: float(
            (theta[local[l.from_bus]] - theta[local[l.to_bus]]) / l.reactance_pu * net.base_mva
        )
        for l in lines
    }
    return solution


def solve_network(
    net: Network,
    out: Iterable[int],
    inj: np.ndarray,
    balance_tol: float = BALANCE_TOL_MW,
) -> Tuple[List[FrozenSet[int]], FlowSolution]:
    """
    Solves every island of the surviving topology and merges the results.

    Returns:
        tuple: The islands and a single FlowSolution covering all of them.
    """
    out = set(out)
    islands = find_islands(net, out)
    merged = FlowSolution(island=frozenset())
    for island_id, island in enumerate(islands):
        merged = merged.merge(solve_island(net, out, island, inj, island_id, balance_tol))
    return islands, merged


def overloaded_lines(
    sol: FlowSolution, net: Network, tol: float = OVERLOAD_TOL
) -> List[Tuple[int, float]]:
    """
    Lists lines whose |flow| exceeds rating * (1 + tol).

    A line loaded to exactly 100% is not overloaded.

    Returns:
        list: (line id, loading fraction) pairs sorted by descending loading,
            ties broken by ascending line id.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    found = []
    for line_id, flow in sol.flows.items():
        rating = net.line(line_id).rating_mw
        if abs(flow) > rating * (1.0 + tol):
            found.append((line_id, abs(flow) / rating))
    return sorted(found, key=lambda item: (-item[1], item[0]))
