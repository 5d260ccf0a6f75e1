"""Continuous QP/LP relaxations of a MipModel, solved through cvxpy."""

import logging
from typing import Mapping, Optional

import cvxpy as cp
import numpy as np

from ras_scopf.core.errors import SolverFailedError
from ras_scopf.miqp.model import MipModel, VarRef
from ras_scopf.miqp.solution import MipSolution, SolveStatus

logger = logging.getLogger(__name__)

EIGEN_CUTOFF = 1e-12  # Hessian eigenvalues below this (relative) are treated as zero

_OPTIMAL = (cp.OPTIMAL, cp.OPTIMAL_INACCURATE)
_INFEASIBLE = (cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE)
_UNBOUNDED = (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE)


class RelaxationSolver:
    """
    Compiles the continuous relaxation of a model once and re-solves it with
    different binary bounds.

    Binary bounds enter the cvxpy problem as parameters, so every node of a
    branch-and-bound tree reuses the same canonicalized problem.

    Attributes:
        model (MipModel): The model being relaxed.
        solver (str): cvxpy solver name.
        solves (int): Number of relaxations solved so far.
    """

    def __init__(self, model: MipModel, solver: Optional[str] = "CLARABEL"):
        model.validate()
        self.model = model
        self.solver = solver
        self.solves = 0
        arrays = model.to_arrays()
        self._arrays = arrays
        self.binaries = np.flatnonzero(arrays.binary)
        n = model.num_variables

        x = cp.Variable(n)
        constraints = []
        continuous = ~arrays.binary
        lower = np.flatnonzero(continuous & np.isfinite(arrays.lb))
        upper = np.flatnonzero(continuous & np.isfinite(arrays.ub))
        if lower.size:
            constraints.append(x[lower] >= arrays.lb[lower])
        if upper.size:
            constraints.append(x[upper] <= arrays.ub[upper])

        self._lower = self._upper = None
        if self.binaries.size:
            self._lower = cp.Parameter(self.binaries.size)
            self._upper = cp.Parameter(self.binaries.size)
            constraints += [x[self.binaries] >= self._lower, x[self.binaries] <= self._upper]

        if arrays.a_ub.shape[0]:
            constraints.append(arrays.a_ub @ x <= arrays.b_ub)
        if arrays.a_eq.shape[0]:
            constraints.append(arrays.a_eq @ x == arrays.b_eq)

        objective = arrays.c @ x + arrays.constant
        support = np.unique(arrays.quad.nonzero()[0])
        if support.size:
            block = arrays.quad[support][:, support].toarray()
            eigenvalues, vectors = np.linalg.eigh(block)
            keep = eigenvalues > EIGEN_CUTOFF * max(1.0, float(np.max(np.abs(eigenvalues))))
            factor = np.sqrt(eigenvalues[keep])[:, None] * vectors[:, keep].T
            objective = objective + cp.sum_squares(factor @ x[support])

        self._x = x
        self._problem = cp.Problem(cp.Minimize(objective), constraints)

    def default_bounds(self):
        """Binary bounds as declared in the model."""
        return self._arrays.lb[self.binaries].copy(), self._arrays.ub[self.binaries].copy()

    def solve(self, lower=None, upper=None) -> MipSolution:
        """
        Solves the relaxation with binaries restricted to [lower, upper].

        Args:
            lower (np.ndarray, optional): Lower bound per binary (model order).
            upper (np.ndarray, optional): Upper bound per binary.

        Returns:
            MipSolution: ``OPTIMAL`` with the relaxed assignment, or
                ``INFEASIBLE``/``UNBOUNDED`` without values.

        Raises:
            SolverFailedError: On solver errors, limits or any status that
                certifies neither optimality, infeasibility nor unboundedness.
        """
        names = [v.name for v in self.model.variables]
        if self.binaries.size:
            default_lower, default_upper = self.default_bounds()
            lower = default_lower if lower is None else np.asarray(lower, dtype=float)
            upper = default_upper if upper is None else np.asarray(upper, dtype=float)
            if np.any(lower > upper):
                return MipSolution(SolveStatus.INFEASIBLE, names=names)
            self._lower.value = lower
            self._upper.value = upper

        self.solves += 1
        status = self._run()
        if status in _INFEASIBLE:
            return MipSolution(SolveStatus.INFEASIBLE, names=names, nodes=1)
        if status in _UNBOUNDED:
            return MipSolution(
                SolveStatus.UNBOUNDED, objective=-np.inf, bound=-np.inf, names=names, nodes=1
            )
        if status not in _OPTIMAL:
            logger.warning("Relaxation of %s ended with status %s", self.model.name, status)
            raise SolverFailedError(f"relaxation of {self.model.name}", status)
        if status == cp.OPTIMAL_INACCURATE:
            logger.warning("Relaxation of %s solved inaccurately", self.model.name)

        values = np.asarray(self._x.value, dtype=float)
        objective = self.model.objective_value(values)
        return MipSolution(
            SolveStatus.OPTIMAL,
            values=values,
            objective=objective,
            bound=objective,
            gap=0.0,
            nodes=1,
            names=names,
        )

    def _run(self) -> str:
        try:
            self._problem.solve(solver=self.solver)
        except cp.error.SolverError as err:
            logger.warning("Solver %s failed (%s); retrying with cvxpy default", self.solver, err)
            try:
                self._problem.solve()
            except cp.error.SolverError as retry_err:
                logger.warning("Relaxation solve failed: %s", retry_err)
                return cp.SOLVER_ERROR
        return self._problem.status


def solve_relaxation(
    m: MipModel,
    fixed: Optional[Mapping[VarRef, float]] = None,
    solver: Optional[str] = "CLARABEL",
) -> MipSolution:
    """
    Solves the continuous relaxation of a model with some binaries fixed.

    Args:
        m (MipModel): The model.
        fixed (Mapping, optional): Binary variable (name or index) -> 0 or 1.
        solver (str, optional): cvxpy solver name.

    Returns:
        MipSolution: Remaining binaries are relaxed to [0, 1].
    """
    relaxation = RelaxationSolver(m, solver=solver)
    lower, upper = relaxation.default_bounds()
    position = {int(index): k for k, index in enumerate(relaxation.binaries)}
    for ref, value in (fixed or {}).items():
        index = m.index(ref)
        if index not in position:
            raise ValueError(f"variable {m.variable(index).name!r} is not binary")
        lower[position[index]] = upper[position[index]] = float(round(value))
    return relaxation.solve(lower, upper)
