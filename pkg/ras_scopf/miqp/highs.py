"""MILP backend: the linearized model handed to HiGHS through scipy."""

import logging
from typing import Optional

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from ras_scopf.core.errors import SolverFailedError
from ras_scopf.miqp.linearize import linearize_objective
from ras_scopf.miqp.model import MipModel
from ras_scopf.miqp.options import SolverOptions
from ras_scopf.miqp.solution import MipSolution, SolveStatus

logger = logging.getLogger(__name__)

_STATUS = {
    0: SolveStatus.OPTIMAL,
    1: SolveStatus.ITERATION_LIMIT,
    2: SolveStatus.INFEASIBLE,
    3: SolveStatus.UNBOUNDED,
}


def solve_highs(m: MipModel, options: Optional[SolverOptions] = None) -> MipSolution:
    """
    Solves a model with ``scipy.optimize.milp``.

    Quadratic costs are first replaced by ``options.segments`` secants per
    variable. The returned assignment covers the original variables only and
    its objective is evaluated with the true (quadratic) costs; ``bound`` and
    ``gap`` are those reported by HiGHS for the linearized model.

    Args:
        m (MipModel): A valid model.
        options (SolverOptions, optional): Gap, time limit, node limit, segments.

    Returns:
        MipSolution: The HiGHS outcome mapped onto ``SolveStatus``.

    Raises:
        SolverFailedError: When HiGHS reports an error rather than a
            terminal status.
    """
    options = options or SolverOptions(backend="highs")
    m.validate()
    lin = linearize_objective(m, options.segments)
    arrays = lin.to_arrays()
    names = [v.name for v in m.variables]

    constraints = []
    if arrays.a_ub.shape[0]:
        constraints.append(LinearConstraint(arrays.a_ub, -np.inf, arrays.b_ub))
    if arrays.a_eq.shape[0]:
        constraints.append(LinearConstraint(arrays.a_eq, arrays.b_eq, arrays.b_eq))

    milp_options = {"mip_rel_gap": options.gap, "node_limit": options.node_limit}
    if options.time_limit is not None:
        milp_options["time_limit"] = options.time_limit

    logger.info(
        "HiGHS on %s: %d variables, %d binaries, %d segments",
        m.name,
        lin.num_variables,
        int(arrays.binary.sum()),
        options.segments,
    )
    result = milp(
        c=arrays.c,
        integrality=arrays.binary.astype(int),
        bounds=Bounds(arrays.lb, arrays.ub),
        constraints=constraints,
        options=milp_options,
    )
    status = _STATUS.get(result.status)
    if status is None:
        logger.warning("HiGHS failed on %s: %s", m.name, result.message)
        raise SolverFailedError(f"HiGHS on {m.name}", f"status {result.status}: {result.message}")
    if result.x is None:
        if status is SolveStatus.ITERATION_LIMIT:
            logger.warning("HiGHS hit a limit on %s without a feasible point", m.name)
        return MipSolution(status, names=names)

    values = np.asarray(result.x[: m.num_variables], dtype=float)
    binaries = arrays.binary[: m.num_variables]
    values[binaries] = np.round(values[binaries])
    objective = m.objective_value(values)
    linear_objective = float(result.fun) + arrays.constant
    bound = getattr(result, "mip_dual_bound", None)
    bound = linear_objective if bound is None or not np.isfinite(bound) else bound + arrays.constant
    gap = getattr(result, "mip_gap", None)
    if status is SolveStatus.ITERATION_LIMIT:
        logger.warning("HiGHS stopped on %s with incumbent %.6f", m.name, objective)
    else:
        logger.info(
            "HiGHS on %s: objective %.6f (linearized %.6f)", m.name, objective, linear_objective
        )
    return MipSolution(
        status,
        values=values,
        objective=objective,
        bound=bound,
        gap=0.0 if gap is None else gap,
        nodes=1,
        names=names,
    )
