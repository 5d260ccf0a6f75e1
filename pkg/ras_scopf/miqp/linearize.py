import logging

import numpy as np

from ras_scopf.core.errors import ModelError
from ras_scopf.miqp.model import MipModel, Sense

logger = logging.getLogger(__name__)

EPIGRAPH_SUFFIX = "__pwl"  # Appended to a variable name to name its cost epigraph variable


def secant_error_bound(coeff: float, lb: float, ub: float, segments: int) -> float:
    """Largest gap between ``coeff * x**2`` and its secant interpolant on [lb, ub]."""
    width = (ub - lb) / segments
    return coeff * width**2 / 4.0


def linearize_objective(m: MipModel, segments: int) -> MipModel:
    """
    Replaces each separable quadratic cost by a piecewise-linear over-approximation.

    For a term ``q * x**2`` with ``x`` in [lb, ub], the interval is cut into
    ``segments`` equal pieces and an epigraph variable ``t`` is bounded below
    by every secant ``q*(a+b)*x - q*a*b`` through the piece endpoints ``a, b``.
    Since the quadratic is convex, the tightest secant at ``x`` is the one of
    the piece containing ``x``, so minimizing ``t`` reproduces the
    interpolant. The deviation is at most ``q * ((ub - lb) / segments)**2 / 4``.

    Args:
        m (MipModel): The model; left untouched.
        segments (int): Pieces per variable, at least 1.

    Returns:
        MipModel: A copy with a linear objective, or ``m`` itself when the
            objective has no quadratic terms.

    Raises:
        ModelError: If a cross term is present or a squared variable has an
            infinite bound.
    """
    if segments < 1:
        raise ModelError("segments must be >= 1")
    terms = m.quadratic_objective
    if not terms:
        return m
    for (i, j), coeff in terms.items():
        if i != j:
            raise ModelError(
                f"cannot linearize non-separable term {coeff:g} * "
                f"{m.variable(i).name} * {m.variable(j).name}"
            )

    lin = m.copy(f"{m.name}_pwl{segments}")
    lin.clear_quadratic_objective()
    worst = 0.0
    for (i, _), coeff in sorted(terms.items()):
        var = m.variable(i)
        if not (np.isfinite(var.lb) and np.isfinite(var.ub)):
            raise ModelError(f"variable {var.name!r} needs finite bounds to be linearized")
        epigraph = lin.add_variable(f"{var.name}{EPIGRAPH_SUFFIX}", lb=-np.inf)
        lin.add_objective_linear(epigraph, 1.0)
        breakpoints = np.linspace(var.lb, var.ub, segments + 1)
        if var.lb == var.ub:
            breakpoints = np.array([var.lb, var.lb])
        for k, (a, b) in enumerate(zip(breakpoints[:-1], breakpoints[1:])):
            lin.add_constraint(
                {epigraph: 1.0, i: -coeff * (a + b)},
                Sense.GE,
                -coeff * a * b,
                name=f"{var.name}{EPIGRAPH_SUFFIX}_{k}",
            )
        worst = max(worst, secant_error_bound(coeff, var.lb, var.ub, segments))

    logger.debug(
        "Linearized %d quadratic terms of %s with %d segments (max error %.3g)",
        len(terms),
        m.name,
        segments,
        worst,
    )
    return lin
