import json
from copy import deepcopy
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Tuple

import pandas as pd

from ras_scopf.core.errors import CascadeError
from ras_scopf.core.network import Contingency, Network

TRACE_COLUMNS = ["step", "kind", "element", "mw"]


class EventKind(str, Enum):
    INITIATING_OUTAGE = "initiating-outage"
    RAS_TRIGGERED = "ras-triggered"
    GENERATOR_TRIP = "generator-trip"
    LOAD_SHED = "load-shed"
    LINE_TRIP = "line-trip"
    ISLAND_FORMED = "island-formed"
    REDISPATCH = "redispatch"
    SYSTEM_FAILURE = "system-failure"
    QUIESCENT = "quiescent"


class CascadeStatus(str, Enum):
    QUIESCENT = "quiescent"
    SYSTEM_FAILURE = "system-failure"
    MAX_STEPS = "max-steps"


FAILURE_MONITORED = "monitored-overload"
FAILURE_UNMONITORED = "unmonitored-overload"
FAILURE_ISLANDING = "islanding"


@dataclass(frozen=True)
class CascadeEvent:
    """One entry of a cascade trace.

    Attributes:
        step (int): Position in the trace, strictly increasing from 1.
        kind (EventKind): What happened.
        elements (tuple): Line, generator or bus ids involved.
        mw (float): Power involved (flow tripped, output lost, load shed).
        detail (str): Free text, e.g. the scheme name.
    """

    step: int
    kind: EventKind
    elements: Tuple[int, ...] = ()
    mw: float = 0.0
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.mw < 0:
            raise CascadeError(f"event {self.step} ({self.kind.value}) has negative MW {self.mw}")

    @property
    def element(self) -> str:
        return "+".join(str(e) for e in self.elements)

    def as_row(self) -> dict:
        return {"step": self.step, "kind": self.kind.value, "element": self.element, "mw": self.mw}


@dataclass
class SystemState:
    """Mutable operating point threaded through one simulator run.

    Attributes:
        line_status (dict): Line id -> in service.
        generator_status (dict): Generator id -> online.
        generation_mw (dict): Generator id -> output, 0 when offline.
        load_mw (dict): Bus id -> load served.
        demand_mw (dict): Bus id -> load of the scenario (upper bound on ``load_mw``).
        ras_triggered (dict): Scheme name -> triggered flag.
    """

    line_status: Dict[int, bool]
    generator_status: Dict[int, bool]
    generation_mw: Dict[int, float]
    load_mw: Dict[int, float]
    demand_mw: Dict[int, float]
    ras_triggered: Dict[str, bool] = field(default_factory=dict)

    @classmethod
    def from_dispatch(
        cls,
        net: Network,
        generation: Mapping[int, float],
        scheme_names: Iterable[str] = (),
    ) -> "SystemState":
        online = {g.id: g.in_service for g in net.generators}
        output = {g.id: float(generation.get(g.id, 0.0)) if online[g.id] else 0.0 for g in net.generators}
        state = cls(
            line_status={l.id: l.in_service for l in net.lines},
            generator_status=online,
            generation_mw=output,
            load_mw=dict(net.loads),
            demand_mw=dict(net.loads),
            ras_triggered={name: False for name in scheme_names},
        )
        return state.validate()

    @property
    def outaged_lines(self) -> FrozenSet[int]:
        return frozenset(l for l, on in self.line_status.items() if not on)

    @property
    def total_generation_mw(self) -> float:
        return float(sum(self.generation_mw.values()))

    @property
    def total_load_served_mw(self) -> float:
        return float(sum(self.load_mw.values()))

    @property
    def total_shed_mw(self) -> float:
        return float(sum(self.demand_mw.values()) - self.total_load_served_mw)

    def island_generation_mw(self, net: Network, island: Iterable[int]) -> float:
        island = set(island)
        return float(sum(self.generation_mw[g.id] for g in net.generators if g.bus in island))

    def island_load_mw(self, island: Iterable[int]) -> float:
        return float(sum(self.load_mw[b] for b in island))

    def copy(self) -> "SystemState":
        return deepcopy(self)

    def validate(self, tol: float = 1e-6) -> "SystemState":
        """
        Raises:
            CascadeError: If an offline generator produces or a bus serves more
                than its demand or a negative load.
        """
        for gen_id, online in self.generator_status.items():
            if not online and abs(self.generation_mw[gen_id]) > tol:
                raise CascadeError(f"offline generator {gen_id} produces {self.generation_mw[gen_id]} MW")
        for bus_id, served in self.load_mw.items():
            if served < -tol or served > self.demand_mw[bus_id] + tol:
                raise CascadeError(f"bus {bus_id} serves {served} MW outside [0, {self.demand_mw[bus_id]}]")
        return self


@dataclass
class CascadeResult:
    """Outcome of one simulator run.

    Attributes:
        contingency (Contingency): The initiating outage.
        status (CascadeStatus): How the run ended.
        events (list): Ordered trace.
        islands (list): Islands of the final topology.
        total_load_shed_mw (float): Initial load minus final load served.
        final_state (SystemState): State at termination.
        label (str): Run label used for trace file names.
    """

    contingency: Contingency
    status: CascadeStatus
    events: List[CascadeEvent]
    islands: List[FrozenSet[int]]
    total_load_shed_mw: float
    final_state: Optional[SystemState] = None
    label: str = ""

    @property
    def failed(self) -> bool:
        return self.status is CascadeStatus.SYSTEM_FAILURE

    @property
    def quiescent(self) -> bool:
        return self.status is CascadeStatus.QUIESCENT

    def of_kind(self, kind: EventKind) -> List[CascadeEvent]:
        kind = EventKind(kind)
        return [e for e in self.events if e.kind is kind]

    @property
    def tripped_lines(self) -> List[int]:
        return [e.elements[0] for e in self.of_kind(EventKind.LINE_TRIP)]

    @property
    def triggered_schemes(self) -> List[str]:
        return [e.detail for e in self.of_kind(EventKind.RAS_TRIGGERED)]

    def failure_mode(self, monitored_lines: Iterable[int] = ()) -> Optional[str]:
        """
        Classifies a failed run.

        Returns:
            str or None: ``monitored-overload`` when a RAS fired yet a
                monitored line tripped later, ``unmonitored-overload`` when
                the first tripped line is not monitored, ``islanding`` when no
                line tripped at all, None for runs that did not fail.
        """
        if not self.failed:
            return None
        monitored = set(monitored_lines)
        trips = self.tripped_lines
        if not trips:
            return FAILURE_ISLANDING
        if self.triggered_schemes and any(l in monitored for l in trips):
            return FAILURE_MONITORED
        if trips[0] not in monitored:
            return FAILURE_UNMONITORED
        return FAILURE_MONITORED

    def to_frame(self) -> pd.DataFrame:
        """The trace as a DataFrame with columns step, kind, element, mw."""
        return pd.DataFrame([e.as_row() for e in self.events], columns=TRACE_COLUMNS)

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False)

    def to_json(self) -> str:
        return json.dumps(
            {
                "contingency": self.contingency.name,
                "status": self.status.value,
                "total_load_shed_mw": self.total_load_shed_mw,
                "islands": [sorted(i) for i in self.islands],
                "events": [dict(e.as_row(), detail=e.detail) for e in self.events],
            }
        )
