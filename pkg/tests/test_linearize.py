from types import SimpleNamespace

import numpy as np
import pytest

from ras_scopf.core.errors import ModelError, SolverFailedError
from ras_scopf.miqp.highs import solve_highs
from ras_scopf.miqp.linearize import EPIGRAPH_SUFFIX, linearize_objective, secant_error_bound
from ras_scopf.miqp.model import MipModel, Sense
from ras_scopf.miqp.options import SolverOptions
from ras_scopf.miqp.branch_and_bound import branch_and_bound
from ras_scopf.miqp.solution import SolveStatus
from ras_scopf.miqp.solve import solve_model
from tests.conftest import knapsack_model, random_model


def _epigraph_value(lin: MipModel, name: str, x: float) -> float:
    """Smallest epigraph value allowed by the secant rows at ``x``."""
    t = lin.index(f"{name}{EPIGRAPH_SUFFIX}")
    v = lin.index(name)
    best = -np.inf
    for con in lin.constraints:
        if t in con.indices:
            coeff = dict(zip(con.indices, con.coeffs))[v]
            best = max(best, con.rhs - coeff * x)
    return best


def _single_square(lb=0.0, ub=2.0, coeff=1.0) -> MipModel:
    m = MipModel("square")
    m.add_variable("x", lb, ub)
    m.add_objective_quadratic("x", "x", coeff)
    return m


def test_secant_error_bound():
    assert secant_error_bound(1.0, 0.0, 2.0, 4) == pytest.approx(0.0625)
    assert secant_error_bound(3.0, -1.0, 1.0, 1) == pytest.approx(3.0)


def test_secants_interpolate_the_square():
    lin = linearize_objective(_single_square(), 4)
    assert not lin.is_quadratic
    assert len(lin.constraints) == 4
    for x in np.linspace(0.0, 2.0, 5):
        assert _epigraph_value(lin, "x", x) == pytest.approx(x**2)
    midpoint = 0.25
    assert _epigraph_value(lin, "x", midpoint) - midpoint**2 == pytest.approx(secant_error_bound(1.0, 0.0, 2.0, 4))


def test_gap_stays_within_bound_everywhere():
    coeff, lb, ub, segments = 2.5, -1.0, 3.0, 7
    lin = linearize_objective(_single_square(lb, ub, coeff), segments)
    bound = secant_error_bound(coeff, lb, ub, segments)
    for x in np.random.default_rng(0).uniform(lb, ub, size=50):
        gap = _epigraph_value(lin, "x", x) - coeff * x**2
        assert -1e-9 <= gap <= bound + 1e-9


def test_original_model_is_untouched():
    m = _single_square()
    linearize_objective(m, 8)
    assert m.is_quadratic
    assert m.num_variables == 1


def test_linear_model_is_returned_as_is():
    m = knapsack_model()
    assert linearize_objective(m, 8) is m


def test_cross_terms_and_free_variables_are_rejected():
    m = MipModel()
    m.add_variable("x", 0.0, 1.0)
    m.add_variable("y", 0.0, 1.0)
    m.add_objective_quadratic("x", "y", 1.0)
    m.add_objective_quadratic("x", "x", 1.0)
    m.add_objective_quadratic("y", "y", 1.0)
    with pytest.raises(ModelError, match="non-separable"):
        linearize_objective(m, 4)
    with pytest.raises(ModelError, match="finite bounds"):
        linearize_objective(_single_square(ub=np.inf), 4)
    with pytest.raises(ModelError):
        linearize_objective(_single_square(), 0)


def test_highs_solves_knapsack():
    result = solve_highs(knapsack_model())
    assert result.is_optimal
    assert result.objective == pytest.approx(-11.0)


@pytest.mark.parametrize("seed", range(6))
def test_highs_is_within_linearization_error(seed):
    m = random_model(np.random.default_rng(100 + seed))
    segments = 32
    error = sum(
        secant_error_bound(q, m.variable(i).lb, m.variable(i).ub, segments)
        for (i, _), q in m.quadratic_objective.items()
    )
    exact = branch_and_bound(m)
    approx = solve_model(m, SolverOptions(backend="highs", segments=segments))
    assert approx.is_optimal
    assert m.max_violation(approx.values) <= 1e-5
    assert approx.objective >= exact.objective - 1e-4
    assert approx.objective <= exact.objective + error + 1e-4


def test_highs_infeasible():
    m = MipModel("empty")
    m.add_binary("b")
    m.add_constraint({"b": 1.0}, Sense.GE, 0.4, name="lo")
    m.add_constraint({"b": 1.0}, Sense.LE, 0.6, name="hi")
    assert solve_highs(m).status is SolveStatus.INFEASIBLE


def test_highs_error_status_raises(monkeypatch):
    failed = SimpleNamespace(status=4, message="HiGHS reported an error", x=None, fun=None)
    monkeypatch.setattr("ras_scopf.miqp.highs.milp", lambda **kwargs: failed)
    with pytest.raises(SolverFailedError, match="status 4"):
        solve_highs(knapsack_model())
