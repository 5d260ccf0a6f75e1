import numpy as np
import pytest

from ras_scopf.core.errors import ModelError
from ras_scopf.miqp.model import MipModel, Sense
from ras_scopf.miqp.mps import export_mps, read_mps
from tests.conftest import knapsack_model, random_model


def _mixed_model() -> MipModel:
    m = random_model(np.random.default_rng(9), name="mixed")
    m.add_variable("free", -np.inf, np.inf)
    m.add_variable("fixed", 2.0, 2.0)
    m.add_variable("upper_only", -np.inf, 3.0)
    m.add_constraint({"free": 1.0, "fixed": 1.0}, Sense.EQ, 2.0, name="eq")
    m.add_constraint({"upper_only": 1.0, "x0": -1.0}, Sense.GE, -4.0, name="ge")
    m.add_objective_quadratic("free", "free", 0.5)
    m.add_objective_constant(12.5)
    return m


def test_export_layout(tmp_path):
    path = export_mps(knapsack_model(), tmp_path / "knapsack.mps")
    text = path.read_text()
    assert text.startswith("NAME knapsack\nROWS\n N  obj\n L  capacity\n")
    assert "'MARKER' 'INTORG'" in text
    assert "'MARKER' 'INTEND'" in text
    assert " BV BND b0" in text
    assert "QUADOBJ" not in text
    assert text.rstrip().endswith("ENDATA")


def test_quadratic_terms_use_half_convention(tmp_path):
    m = MipModel("q")
    m.add_variable("x", 0.0, 1.0)
    m.add_objective_quadratic("x", "x", 3.0)
    m.add_objective_constant(4.0)
    text = export_mps(m, tmp_path / "q.mps").read_text()
    assert "    x x 6" in text
    assert "    RHS obj -4" in text


def test_read_back_reproduces_the_model(tmp_path):
    m = _mixed_model()
    again = read_mps(export_mps(m, tmp_path / "mixed.mps"))
    assert again.name == "mixed"
    assert [(v.name, v.kind, v.lb, v.ub) for v in again.variables] == [
        (v.name, v.kind, v.lb, v.ub) for v in m.variables
    ]
    assert [(c.name, c.sense, c.rhs) for c in again.constraints] == [
        (c.name, c.sense, c.rhs) for c in m.constraints
    ]
    assert again.objective_constant == pytest.approx(12.5)
    rng = np.random.default_rng(1)
    for _ in range(5):
        x = rng.uniform(-3.0, 3.0, size=m.num_variables)
        assert again.objective_value(x) == pytest.approx(m.objective_value(x))
        assert again.max_violation(x) == pytest.approx(m.max_violation(x))


def test_names_with_spaces_are_rejected(tmp_path):
    m = MipModel()
    m.add_variable("bad name")
    with pytest.raises(ModelError, match="cannot be written"):
        export_mps(m, tmp_path / "bad.mps")


def test_unsupported_section(tmp_path):
    path = tmp_path / "ranges.mps"
    path.write_text("NAME r\nROWS\n N obj\nRANGES\n    RNG c1 1\nENDATA\n")
    with pytest.raises(ModelError, match="RANGES"):
        read_mps(path)
