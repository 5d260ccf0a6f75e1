import json
from enum import Enum
from typing import Dict, Optional

import numpy as np


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"


class MipSolution:
    """The outcome of solving a MipModel.

    Attributes:
        status (SolveStatus): Termination status.
        values (np.ndarray or None): Assignment in variable-index order; for
            ``ITERATION_LIMIT`` this is the best incumbent, if any.
        objective (float): Objective value of ``values`` (``inf`` if none).
        bound (float): Best proven lower bound.
        gap (float): Relative gap between ``objective`` and ``bound``.
        nodes (int): Relaxations solved.
        names (list): Variable names, index-aligned with ``values``.
    """

    def __init__(
        self,
        status,
        values=None,
        objective=float("inf"),
        bound=-float("inf"),
        gap=float("inf"),
        nodes=0,
        names=None,
    ):
        self.status = SolveStatus(status)
        self.values = None if values is None else np.asarray(values, dtype=float)
        self.objective = float(objective)
        self.bound = float(bound)
        self.gap = float(gap)
        self.nodes = int(nodes)
        self.names = list(names or [])

    @property
    def is_optimal(self) -> bool:
        return self.status is SolveStatus.OPTIMAL

    @property
    def has_values(self) -> bool:
        return self.values is not None

    @property
    def assignment(self) -> Dict[str, float]:
        """Variable name -> value; empty when no assignment is available."""
        if self.values is None:
            return {}
        return dict(zip(self.names, self.values.tolist()))

    def value(self, name: str, default: Optional[float] = None) -> Optional[float]:
        if self.values is None:
            return default
        try:
            return float(self.values[self.names.index(name)])
        except ValueError:
            return default

    def to_json(self) -> str:
        """Serialize the status, objective and assignment to a JSON string."""
        return json.dumps(
            {
                "status": self.status.value,
                "objective": self.objective if np.isfinite(self.objective) else None,
                "bound": self.bound if np.isfinite(self.bound) else None,
                "gap": self.gap if np.isfinite(self.gap) else None,
                "nodes": self.nodes,
                "assignment": self.assignment,
            }
        )

    def __repr__(self):
        return (
            f"MipSolution(status={self.status.value}, objective={self.objective:.6g}, "
            f"gap={self.gap:.3g}, nodes={self.nodes})"
        )
