"""Best-bound branch-and-bound over cvxpy relaxations."""

import heapq
import logging
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ras_scopf.core.errors import SolverFailedError
from ras_scopf.miqp.model import MipModel
from ras_scopf.miqp.options import SolverOptions
from ras_scopf.miqp.relaxation import RelaxationSolver
from ras_scopf.miqp.solution import MipSolution, SolveStatus

logger = logging.getLogger(__name__)

DIVE_ROUND_TOL = 0.1  # Binaries this close to 0 or 1 are fixed together during the root dive
LOG_EVERY = 500  # Nodes between progress lines at INFO level


@dataclass(order=True)
class _Node:
    bound: float
    seq: int
    lower: np.ndarray = field(compare=False)
    upper: np.ndarray = field(compare=False)
    values: np.ndarray = field(compare=False)
    depth: int = field(compare=False, default=0)


class BranchAndBound:
    """
    Solves a MipModel by best-bound search with most-fractional branching.

    Each node is a relaxation with some binaries fixed. Children are solved
    eagerly when their parent is branched, so the heap is always keyed by a
    proven bound; ties on the bound are broken by creation order, which makes
    the search deterministic for fixed options.

    Attributes:
        model (MipModel): The model being solved.
        options (SolverOptions): Gap, tolerances and limits.
        nodes (int): Relaxations solved so far.
    """

    def __init__(self, model: MipModel, options: Optional[SolverOptions] = None):
        self.model = model
        self.options = options or SolverOptions()
        self.relaxation = RelaxationSolver(model, solver=self.options.relaxation_solver)
        self.binaries = self.relaxation.binaries
        self.names = [v.name for v in model.variables]
        self.nodes = 0
        self._seq = 0
        self._incumbent = None
        self._incumbent_obj = np.inf
        self._rejected = 0
        self._started = None

    # helpers

    def _solve(self, lower, upper) -> MipSolution:
        self.nodes += 1
        return self.relaxation.solve(lower, upper)

    def _fractionality(self, values: np.ndarray) -> np.ndarray:
        bins = values[self.binaries]
        return np.abs(bins - np.round(bins))

    def _is_integral(self, values: np.ndarray) -> bool:
        if not self.binaries.size:
            return True
        return bool(np.all(self._fractionality(values) <= self.options.integrality_tol))

    def _threshold(self) -> float:
        """Objective above which a node cannot improve the incumbent by more than the gap."""
        if self._incumbent is None:
            return np.inf
        return self._incumbent_obj - self.options.gap * max(1.0, abs(self._incumbent_obj))

    def _out_of_budget(self) -> bool:
        if self.nodes >= self.options.node_limit:
            return True
        limit = self.options.time_limit
        return limit is not None and time.monotonic() - self._started > limit

    def _offer(self, values: np.ndarray) -> None:
        """Polishes an integral relaxation point and keeps it if it improves the incumbent."""
        rounded = np.round(values[self.binaries])
        if self.binaries.size:
            polished = self._solve(rounded, rounded)
            if not polished.is_optimal:
                self._rejected += 1
                return
            values = polished.values.copy()
            values[self.binaries] = rounded
        violation = self.model.max_violation(values)
        if violation > self.options.feasibility_tol:
            logger.debug("Rejected integral point with violation %.3g", violation)
            self._rejected += 1
            return
        objective = self.model.objective_value(values)
        if objective < self._incumbent_obj:
            self._incumbent = values
            self._incumbent_obj = objective
            logger.info(
                "%s: new incumbent %.6f after %d nodes", self.model.name, objective, self.nodes
            )

    def _dive(self, root: MipSolution, lower, upper) -> None:
        """Rounds the root relaxation step by step to seed an incumbent."""
        lower, upper = lower.copy(), upper.copy()
        values = root.values
        while not self._is_integral(values):
            if self._out_of_budget():
                return
            free = lower < upper
            frac = self._fractionality(values)
            fix = free & (frac <= DIVE_ROUND_TOL)
            if not fix.any():
                candidates = np.flatnonzero(free)
                fix[candidates[np.argmin(frac[candidates])]] = True
            rounded = np.round(values[self.binaries])
            lower[fix] = upper[fix] = rounded[fix]
            step = self._solve(lower, upper)
            if not step.is_optimal:
                logger.debug("Root dive hit an infeasible node after %d nodes", self.nodes)
                return
            values = step.values
        self._offer(values)

    def _branch_index(self, values: np.ndarray, lower, upper) -> int:
        """Position (within the binaries) of the most fractional free binary, first on ties."""
        frac = np.where(lower < upper, self._fractionality(values), -1.0)
        return int(np.argmax(frac))

    def _push(self, heap, bound, lower, upper, values, depth) -> None:
        self._seq += 1
        heapq.heappush(heap, _Node(bound, self._seq, lower, upper, values, depth))

    def _result(self, status: SolveStatus, bound: float) -> MipSolution:
        if self._incumbent is None:
            return MipSolution(status, bound=bound, nodes=self.nodes, names=self.names)
        objective = self._incumbent_obj
        bound = min(bound, objective)
        gap = (objective - bound) / max(1.0, abs(objective))
        return MipSolution(
            status,
            values=self._incumbent,
            objective=objective,
            bound=bound,
            gap=gap,
            nodes=self.nodes,
            names=self.names,
        )

    def _fail(self) -> None:
        """Integral points were found but none passed the feasibility check."""
        logger.warning(
            "%s: rejected %d integral points and found no incumbent", self.model.name, self._rejected
        )
        raise SolverFailedError(f"branch-and-bound on {self.model.name}", "numerical-trouble")

    # search

    def solve(self) -> MipSolution:
        """
        Runs the search.

        Returns:
            MipSolution: ``OPTIMAL`` once the gap closes, ``INFEASIBLE`` or
                ``UNBOUNDED`` from the root, or ``ITERATION_LIMIT`` carrying
                the best incumbent when a node or time limit stops the search.

        Raises:
            SolverFailedError: If the search ends without an incumbent after
                rejecting integral relaxation points, or a relaxation fails.
        """
        self._started = time.monotonic()
        logger.info(
            "Branch-and-bound on %s: %d variables, %d binaries",
            self.model.name,
            self.model.num_variables,
            self.binaries.size,
        )
        lower, upper = self.relaxation.default_bounds()
        root = self._solve(lower, upper)
        if root.status is SolveStatus.INFEASIBLE:
            logger.info("%s: root relaxation infeasible", self.model.name)
            return MipSolution(SolveStatus.INFEASIBLE, nodes=self.nodes, names=self.names)
        if root.status is SolveStatus.UNBOUNDED:
            logger.info("%s: root relaxation unbounded", self.model.name)
            return MipSolution(
                SolveStatus.UNBOUNDED,
                objective=-np.inf,
                bound=-np.inf,
                nodes=self.nodes,
                names=self.names,
            )

        if self._is_integral(root.values):
            self._offer(root.values)
            if self._incumbent is not None:
                return self._result(SolveStatus.OPTIMAL, root.objective)
            if not np.any(lower < upper):
                self._fail()
            logger.info("%s: integral root rejected; branching", self.model.name)
        if self.options.dive:
            self._dive(root, lower, upper)

        heap = []
        self._push(heap, root.objective, lower, upper, root.values, 0)
        while heap:
            if heap[0].bound >= self._threshold():
                break
            if self._out_of_budget():
                logger.warning(
                    "%s: search stopped after %d nodes (%.1fs) with %s",
                    self.model.name,
                    self.nodes,
                    time.monotonic() - self._started,
                    "no incumbent" if self._incumbent is None else f"incumbent {self._incumbent_obj:.6f}",
                )
                return self._result(SolveStatus.ITERATION_LIMIT, heap[0].bound)

            node = heapq.heappop(heap)
            pos = self._branch_index(node.values, node.lower, node.upper)
            logger.debug(
                "node bound=%.6f depth=%d branch=%s value=%.4f",
                node.bound,
                node.depth,
                self.names[self.binaries[pos]],
                node.values[self.binaries[pos]],
            )
            for side in (0.0, 1.0):
                lower, upper = node.lower.copy(), node.upper.copy()
                lower[pos] = upper[pos] = side
                child = self._solve(lower, upper)
                if not child.is_optimal:
                    continue
                bound = max(child.objective, node.bound)
                if bound >= self._threshold():
                    continue
                if self._is_integral(child.values):
                    self._offer(child.values)
                    continue
                self._push(heap, bound, lower, upper, child.values, node.depth + 1)
            if self.nodes % LOG_EVERY < 2:
                logger.info(
                    "%s: %d nodes, %d open, best bound %.6f",
                    self.model.name,
                    self.nodes,
                    len(heap),
                    heap[0].bound if heap else node.bound,
                )

        if self._incumbent is None:
            if self._rejected:
                self._fail()
            logger.info("%s: infeasible after %d nodes", self.model.name, self.nodes)
            return MipSolution(SolveStatus.INFEASIBLE, nodes=self.nodes, names=self.names)
        bound = heap[0].bound if heap else self._incumbent_obj
        result = self._result(SolveStatus.OPTIMAL, bound)
        logger.info(
            "%s: optimal %.6f (gap %.2e) in %d nodes, %.2fs",
            self.model.name,
            result.objective,
            result.gap,
            self.nodes,
            time.monotonic() - self._started,
        )
        return result


def branch_and_bound(m: MipModel, opts: Optional[SolverOptions] = None) -> MipSolution:
    """
    Solves a mixed-integer model to the relative gap in ``opts``.

    Args:
        m (MipModel): A valid model.
        opts (SolverOptions, optional): Gap, tolerances, node and time limits.

    Returns:
        MipSolution: See ``BranchAndBound.solve``.
    """
    return BranchAndBound(m, opts).solve()
