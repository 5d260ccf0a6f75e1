from .state import (
    CascadeEvent,
    CascadeResult,
    CascadeStatus,
    EventKind,
    FAILURE_ISLANDING,
    FAILURE_MONITORED,
    FAILURE_UNMONITORED,
    SystemState,
)
from .redispatch import build_redispatch_model, redispatch_island
from .simulator import (
    CascadeOptions,
    CascadeSimulator,
    apply_ras,
    check_ras_trigger,
    check_system_failure,
    run_cascade,
    select_trip,
)

__all__ = [
    "CascadeEvent",
    "CascadeOptions",
    "CascadeResult",
    "CascadeSimulator",
    "CascadeStatus",
    "EventKind",
    "FAILURE_ISLANDING",
    "FAILURE_MONITORED",
    "FAILURE_UNMONITORED",
    "SystemState",
    "apply_ras",
    "build_redispatch_model",
    "check_ras_trigger",
    "check_system_failure",
    "redispatch_island",
    "run_cascade",
    "select_trip",
]
