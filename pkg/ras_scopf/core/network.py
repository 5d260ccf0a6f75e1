import logging
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Tuple

import networkx as nx
import numpy as np

from ras_scopf.core.errors import NetworkValidationError

logger = logging.getLogger(__name__)

BASE_MVA = 100.0  # Per-unit power base used for all internal math
PARTICIPATION_TOL = 1e-9  # Allowed deviation of sum(K_i) from 1 over the balancing set

CASE_STUDY_RATING_SCALE = 0.80  # All line ratings are derated to 80% of the published value
CASE_STUDY_RADIAL_LINE = 11  # Line 7-8, the only line feeding bus 7
CASE_STUDY_RADIAL_BUSES = (7, 8)
CASE_STUDY_RADIAL_SCALE = 1.50  # Radial line rating relative to its original rating
CASE_STUDY_BALANCING = tuple(range(1, 17))  # Generators 1-16 carry the distributed slack
CASE_STUDY_RAS_GENERATOR = 22
CASE_STUDY_RAS_CAPACITY_MW = 155.0


@dataclass(frozen=True)
class Bus:
    id: int
    base_load_mw: float = 0.0


@dataclass(frozen=True)
class Line:
    """A transmission line in the DC model.

    Susceptance follows the b_ij = -1/x_ij convention so that the flow from
    ``from_bus`` to ``to_bus`` is (theta_from - theta_to) / x.
    """

    id: int
    from_bus: int
    to_bus: int
    reactance_pu: float
    rating_mw: float
    in_service: bool = True
    radial: bool = False

    @property
    def susceptance_pu(self) -> float:
        return -1.0 / self.reactance_pu

    @property
    def buses(self) -> Tuple[int, int]:
        return (self.from_bus, self.to_bus)


@dataclass(frozen=True)
class Generator:
    id: int
    bus: int
    p_min_mw: float
    p_max_mw: float
    cost_quad: float = 0.0  # $/MW^2
    cost_lin: float = 0.0  # $/MW
    cost_const: float = 0.0  # $ per in-service unit
    participation: float = 0.0
    in_service: bool = True

    def cost(self, p_mw: float) -> float:
        return self.cost_quad * p_mw**2 + self.cost_lin * p_mw + self.cost_const


@dataclass(frozen=True)
class Contingency:
    """A set of simultaneously outaged lines."""

    outaged_lines: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "outaged_lines", frozenset(self.outaged_lines))
        if not self.outaged_lines:
            raise NetworkValidationError("Contingency must outage at least one line")

    @classmethod
    def line(cls, line_id: int) -> "Contingency":
        return cls(frozenset([line_id]))

    @property
    def name(self) -> str:
        return "+".join(str(line_id) for line_id in sorted(self.outaged_lines))

    @property
    def sort_key(self) -> Tuple[int, ...]:
        return tuple(sorted(self.outaged_lines))

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Network:
    """The immutable grid model shared by every optimizer and simulator run.

    Attributes:
        buses (tuple): Buses ordered by id (ids contiguous from 1).
        lines (tuple): Lines ordered by id.
        generators (tuple): Generators ordered by id.
        base_mva (float): Power base for per-unit conversion.
        prepared (bool): Set once ``prepare_paper_case`` has been applied.
        name (str): Free-form label, usually the case file stem.
    """

    buses: Tuple[Bus, ...]
    lines: Tuple[Line, ...]
    generators: Tuple[Generator, ...]
    base_mva: float = BASE_MVA
    prepared: bool = False
    name: str = "network"
    _bus_pos: Dict[int, int] = field(default=None, init=False, repr=False, compare=False)
    _lines_by_id: Dict[int, Line] = field(default=None, init=False, repr=False, compare=False)
    _gens_by_id: Dict[int, Generator] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "buses", tuple(sorted(self.buses, key=lambda b: b.id)))
        object.__setattr__(self, "lines", tuple(sorted(self.lines, key=lambda l: l.id)))
        object.__setattr__(
            self, "generators", tuple(sorted(self.generators, key=lambda g: g.id))
        )
        object.__setattr__(self, "_bus_pos", {b.id: i for i, b in enumerate(self.buses)})
        object.__setattr__(self, "_lines_by_id", {l.id: l for l in self.lines})
        object.__setattr__(self, "_gens_by_id", {g.id: g for g in self.generators})
        validate_network(self)

    @property
    def bus_ids(self) -> List[int]:
        return [b.id for b in self.buses]

    @property
    def total_load_mw(self) -> float:
        return float(sum(b.base_load_mw for b in self.buses))

    @property
    def loads(self) -> Dict[int, float]:
        return {b.id: b.base_load_mw for b in self.buses}

    def bus_position(self, bus_id: int) -> int:
        return self._bus_pos[bus_id]

    def line(self, line_id: int) -> Line:
        try:
            return self._lines_by_id[line_id]
        except KeyError:
            raise NetworkValidationError(f"Unknown line {line_id}") from None

    def generator(self, gen_id: int) -> Generator:
        try:
            return self._gens_by_id[gen_id]
        except KeyError:
            raise NetworkValidationError(f"Unknown generator {gen_id}") from None

    def has_line(self, line_id: int) -> bool:
        return line_id in self._lines_by_id

    def generators_at(self, bus_id: int) -> List[Generator]:
        return [g for g in self.generators if g.bus == bus_id]

    def active_lines(self, out: Iterable[int] = ()) -> List[Line]:
        out = set(out)
        return [l for l in self.lines if l.in_service and l.id not in out]

    def active_generators(self) -> List[Generator]:
        return [g for g in self.generators if g.in_service]

    def participation(self) -> Dict[int, float]:
        return {g.id: g.participation for g in self.generators}

    def with_loads(self, loads: Mapping[int, float]) -> "Network":
        """Returns a copy of the network with bus loads replaced.

        Args:
            loads (Mapping[int, float]): New load in MW per bus id; buses not
                listed keep their load.
        """
        buses = [replace(b, base_load_mw=float(loads.get(b.id, b.base_load_mw))) for b in self.buses]
        return replace(self, buses=tuple(buses))

    def with_lines(self, lines: Iterable[Line]) -> "Network":
        return replace(self, lines=tuple(lines))

    def with_generators(self, generators: Iterable[Generator]) -> "Network":
        return replace(self, generators=tuple(generators))

    def radial_lines(self) -> List[int]:
        return [l.id for l in self.lines if l.radial]


def compute_radial_flags(buses: Iterable[Bus], lines: Iterable[Line]) -> List[Line]:
    """Marks each in-service line whose removal isolates a degree-1 bus.

    Returns:
        list: The lines with their ``radial`` flag recomputed.
    """
    graph = nx.MultiGraph()
    graph.add_nodes_from(b.id for b in buses)
    lines = list(lines)
    for line in lines:
        if line.in_service:
            graph.add_edge(line.from_bus, line.to_bus, key=line.id)
    flagged = []
    for line in lines:
        radial = line.in_service and (
            graph.degree(line.from_bus) == 1 or graph.degree(line.to_bus) == 1
        )
        flagged.append(replace(line, radial=radial))
    return flagged


def validate_network(net: Network) -> None:
    """Checks the Network invariants and raises on the first violation.

    Raises:
        NetworkValidationError: Naming the violated invariant.
    """
    ids = [b.id for b in net.buses]
    if len(set(ids)) != len(ids):
        raise NetworkValidationError("bus ids must be unique")
    if ids != list(range(1, len(ids) + 1)):
        raise NetworkValidationError("bus ids must be contiguous from 1")
    for bus in net.buses:
        if bus.base_load_mw < 0:
            raise NetworkValidationError(f"bus {bus.id}: base_load_mw must be >= 0")
    if net.base_mva <= 0:
        raise NetworkValidationError("base_mva must be > 0")

    bus_set = set(ids)
    line_ids = [l.id for l in net.lines]
    if len(set(line_ids)) != len(line_ids):
        raise NetworkValidationError("line ids must be unique")
    for line in net.lines:
        if line.from_bus not in bus_set or line.to_bus not in bus_set:
            raise NetworkValidationError(
                f"line {line.id} references unknown bus ({line.from_bus}, {line.to_bus})"
            )
        if line.from_bus == line.to_bus:
            raise NetworkValidationError(f"line {line.id}: from_bus must differ from to_bus")
        if line.rating_mw <= 0:
            raise NetworkValidationError(f"line {line.id}: rating_mw must be > 0")
        if line.reactance_pu == 0:
            raise NetworkValidationError(f"line {line.id}: reactance must be non-zero")

    recomputed = {l.id: l.radial for l in compute_radial_flags(net.buses, net.lines)}
    for line in net.lines:
        if line.radial != recomputed[line.id]:
            raise NetworkValidationError(
                f"line {line.id}: radial flag inconsistent with topology"
            )

    gen_ids = [g.id for g in net.generators]
    if len(set(gen_ids)) != len(gen_ids):
        raise NetworkValidationError("generator ids must be unique")
    for gen in net.generators:
        if gen.bus not in bus_set:
            raise NetworkValidationError(f"generator {gen.id} references unknown bus {gen.bus}")
        if not 0 <= gen.p_min_mw <= gen.p_max_mw:
            raise NetworkValidationError(
                f"generator {gen.id}: requires 0 <= p_min_mw <= p_max_mw"
            )
        if gen.participation < 0:
            raise NetworkValidationError(f"generator {gen.id}: participation must be >= 0")
        if gen.cost_quad < 0:
            raise NetworkValidationError(f"generator {gen.id}: cost_quad must be >= 0")

    total_k = sum(g.participation for g in net.generators)
    if total_k > 0 and abs(total_k - 1.0) > PARTICIPATION_TOL:
        raise NetworkValidationError(
            f"participation factors over the balancing set sum to {total_k}, expected 1"
        )


def participation_factors(net: Network, balancing: Iterable[int]) -> Dict[int, float]:
    """Computes capacity-proportional droop factors.

    K_i = p_max_i / sum(p_max_k for k in balancing) for generators in the
    balancing set, 0 for every other generator.

    Args:
        net (Network): The network.
        balancing (Iterable[int]): Ids of the generators carrying the slack.

    Returns:
        dict: Generator id -> participation factor, for every generator.

    Raises:
        NetworkValidationError: Empty balancing set, unknown id, or zero capacity.
    """
    balancing = sorted(set(balancing))
    if not balancing:
        raise NetworkValidationError("balancing set must be non-empty")
    for gen_id in balancing:
        net.generator(gen_id)
    capacity = sum(net.generator(g).p_max_mw for g in balancing)
    if capacity <= 0:
        raise NetworkValidationError("total p_max over the balancing set is 0")
    members = set(balancing)
    return {
        g.id: (g.p_max_mw / capacity if g.id in members else 0.0) for g in net.generators
    }


def prepare_paper_case(
    net: Network,
    rating_scale: float = CASE_STUDY_RATING_SCALE,
    radial_line: int = CASE_STUDY_RADIAL_LINE,
    radial_scale: float = CASE_STUDY_RADIAL_SCALE,
    balancing: Iterable[int] = CASE_STUDY_BALANCING,
) -> Network:
    """Applies the case-study modifications to the RTS-96 single-area case.

    All ratings are scaled by ``rating_scale``, the radial line is then set to
    ``radial_scale`` times its original rating, and the balancing generators
    receive capacity-proportional participation factors.

    Raises:
        NetworkValidationError: If the case was already prepared, or the radial
            line does not connect buses 7 and 8.
    """
    if net.prepared:
        raise NetworkValidationError("prepare_paper_case has already been applied")
    radial = net.line(radial_line)
    if set(radial.buses) != set(CASE_STUDY_RADIAL_BUSES):
        raise NetworkValidationError(
            f"line {radial_line} must connect buses {CASE_STUDY_RADIAL_BUSES}, got {radial.buses}"
        )

    lines = []
    for line in net.lines:
        scale = radial_scale if line.id == radial_line else rating_scale
        lines.append(replace(line, rating_mw=line.rating_mw * scale))

    factors = participation_factors(net, balancing)
    generators = [replace(g, participation=factors[g.id]) for g in net.generators]

    capacity = {g.id: g.p_max_mw for g in net.generators}.get(CASE_STUDY_RAS_GENERATOR)
    if capacity is None or abs(capacity - CASE_STUDY_RAS_CAPACITY_MW) > 1e-9:
        logger.warning(
            "Generator %d is not a %.0f MW unit; generator numbering may not match the unit table",
            CASE_STUDY_RAS_GENERATOR,
            CASE_STUDY_RAS_CAPACITY_MW,
        )

    logger.info(
        "Prepared %s: ratings x%.2f, line %d x%.2f, %d balancing generators",
        net.name,
        rating_scale,
        radial_line,
        radial_scale,
        sum(1 for k in factors.values() if k > 0),
    )
    return replace(net, lines=tuple(lines), generators=tuple(generators), prepared=True)


class SusceptanceMatrices(NamedTuple):
    """Nodal and branch susceptance matrices in per unit.

    ``bus`` is the |B| x |B| nodal matrix (rows ordered as ``Network.buses``);
    ``branch`` maps angles to line flows, one row per entry in ``line_ids``.
    """

    bus: np.ndarray
    branch: np.ndarray
    line_ids: Tuple[int, ...]


def susceptance_matrices(net: Network, out: Iterable[int] = ()) -> SusceptanceMatrices:
    """Builds the DC susceptance matrices for in-service, non-outaged lines.

    Flows in per unit are ``branch @ theta``, i.e. (theta_i - theta_j) / x_ij.
    """
    active = net.active_lines(out)
    n = len(net.buses)
    branch = np.zeros((len(active), n))
    for row, line in enumerate(active):
        inv_x = 1.0 / line.reactance_pu
        branch[row, net.bus_position(line.from_bus)] += inv_x
        branch[row, net.bus_position(line.to_bus)] -= inv_x
    incidence = np.zeros((len(active), n))
    for row, line in enumerate(active):
        incidence[row, net.bus_position(line.from_bus)] = 1.0
        incidence[row, net.bus_position(line.to_bus)] = -1.0
    bus = incidence.T @ branch
    return SusceptanceMatrices(bus=bus, branch=branch, line_ids=tuple(l.id for l in active))


def find_islands(net: Network, out: Iterable[int] = ()) -> List[FrozenSet[int]]:
    """Partitions buses into connected components of the surviving line graph.

    Returns:
        list: Islands as frozensets of bus ids, sorted by smallest member.
    """
    graph = nx.Graph()
    graph.add_nodes_from(net.bus_ids)
    graph.add_edges_from(line.buses for line in net.active_lines(out))
    islands = [frozenset(component) for component in nx.connected_components(graph)]
    return sorted(islands, key=min)


def non_radial_contingencies(net: Network) -> List[Contingency]:
    """Single outages of every in-service, non-radial line."""
    return [Contingency.line(l.id) for l in net.lines if l.in_service and not l.radial]
