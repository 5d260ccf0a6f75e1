from dataclasses import dataclass
from typing import Optional

from ras_scopf.core.errors import ConfigError

DEFAULT_GAP = 1e-6  # Relative gap between incumbent and best bound
INTEGRALITY_TOL = 1e-6
FEASIBILITY_TOL = 1e-6
DEFAULT_NODE_LIMIT = 200_000
DEFAULT_SEGMENTS = 64  # Secant segments per quadratic cost when linearizing

BACKENDS = ("branch_and_bound", "highs")


@dataclass
class SolverOptions:
    """Settings shared by every solver backend.

    Attributes:
        backend (str): ``branch_and_bound`` (QP relaxations) or ``highs``
            (linearized objective, HiGHS MILP).
        gap (float): Relative optimality gap at which search stops.
        integrality_tol (float): Distance from 0/1 accepted as integral.
        feasibility_tol (float): Row and bound violation accepted on incumbents.
        node_limit (int): Maximum relaxations solved before giving up.
        time_limit (float, optional): Wall-clock seconds before giving up.
        segments (int): Linearization segments used by the ``highs`` backend.
        relaxation_solver (str): cvxpy solver name for QP/LP relaxations.
        dive (bool): Run the rounding dive at the root to seed an incumbent.
    """

    backend: str = "branch_and_bound"
    gap: float = DEFAULT_GAP
    integrality_tol: float = INTEGRALITY_TOL
    feasibility_tol: float = FEASIBILITY_TOL
    node_limit: int = DEFAULT_NODE_LIMIT
    time_limit: Optional[float] = None
    segments: int = DEFAULT_SEGMENTS
    relaxation_solver: str = "CLARABEL"
    dive: bool = True

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ConfigError(f"unknown solver backend {self.backend!r}; expected one of {BACKENDS}")
        if self.gap < 0:
            raise ConfigError("gap must be >= 0")
        if self.node_limit < 1:
            raise ConfigError("node_limit must be >= 1")
        if self.segments < 1:
            raise ConfigError("segments must be >= 1")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ConfigError("time_limit must be > 0")
