from pathlib import Path

import pytest

from ras_scopf.core.case_reader import parse_case
from ras_scopf.core.network import Bus, Generator, Line, Network, compute_radial_flags, prepare_paper_case
from ras_scopf.formulations.config import FormulationConfig
from ras_scopf.formulations.scheme import RasScheme
from ras_scopf.miqp.model import MipModel, Sense

DATA_DIR = Path(__file__).resolve().parents[1] / "data"
RTS96_CASE = DATA_DIR / "rts96.case"


def make_network(buses, lines, generators, name="test"):
    buses = [Bus(b, load) for b, load in buses]
    lines = compute_radial_flags(buses, [Line(*row) for row in lines])
    return Network(buses=tuple(buses), lines=tuple(lines), generators=tuple(generators), name=name)


@pytest.fixture
def parallel_net() -> Network:
    """Two buses joined by two identical 60 MW lines.

    The cheap unit sits at bus 1 and the expensive one next to the 100 MW
    load at bus 2, so losing either line overloads the other under OPF.
    """
    return make_network(
        buses=[(1, 0.0), (2, 100.0)],
        lines=[(1, 1, 2, 0.1, 60.0), (2, 1, 2, 0.1, 60.0)],
        generators=[
            Generator(1, 1, 0.0, 200.0, cost_quad=0.01, cost_lin=10.0, participation=0.5),
            Generator(2, 2, 0.0, 200.0, cost_quad=0.01, cost_lin=30.0, participation=0.5),
        ],
        name="parallel",
    )


@pytest.fixture
def parallel_scheme() -> RasScheme:
    return RasScheme(frozenset([1, 2]), frozenset([1, 2]), name="ras1")


@pytest.fixture
def parallel_cfg(parallel_scheme) -> FormulationConfig:
    return FormulationConfig(rho=10.0, schemes=(parallel_scheme,))


@pytest.fixture
def triangle_net() -> Network:
    """Three buses in a ring plus a radial spur to bus 4."""
    return make_network(
        buses=[(1, 0.0), (2, 60.0), (3, 90.0), (4, 20.0)],
        lines=[
            (1, 1, 2, 0.1, 100.0),
            (2, 2, 3, 0.2, 100.0),
            (3, 1, 3, 0.1, 100.0),
            (4, 3, 4, 0.05, 50.0),
        ],
        generators=[
            Generator(1, 1, 0.0, 150.0, cost_quad=0.02, cost_lin=12.0, participation=0.6),
            Generator(2, 2, 10.0, 100.0, cost_quad=0.03, cost_lin=20.0, participation=0.4),
        ],
        name="triangle",
    )


@pytest.fixture(scope="session")
def rts96() -> Network:
    return parse_case(RTS96_CASE)


@pytest.fixture(scope="session")
def rts96_prepared(rts96) -> Network:
    return prepare_paper_case(rts96)


def random_model(rng, n_cont=3, n_bin=4, n_rows=4, quadratic=True, name="random"):
    """A small feasible convex MIQP: the rows are built around a random point."""
    m = MipModel(name)
    x0 = rng.uniform(-2.0, 2.0, size=n_cont)
    b0 = rng.integers(0, 2, size=n_bin).astype(float)
    for i in range(n_cont):
        m.add_variable(f"x{i}", -5.0, 5.0)
        if quadratic:
            m.add_objective_quadratic(f"x{i}", f"x{i}", float(rng.uniform(0.5, 2.0)))
        m.add_objective_linear(f"x{i}", float(rng.uniform(-3.0, 3.0)))
    for j in range(n_bin):
        m.add_binary(f"b{j}")
        m.add_objective_linear(f"b{j}", float(rng.uniform(-2.0, 2.0)))
    for r in range(n_rows):
        a = rng.uniform(-1.0, 1.0, size=n_cont)
        e = rng.uniform(-3.0, 3.0, size=n_bin)
        coeffs = {**{f"x{i}": a[i] for i in range(n_cont)}, **{f"b{j}": e[j] for j in range(n_bin)}}
        m.add_constraint(coeffs, Sense.LE, float(a @ x0 + e @ b0 + rng.uniform(0.0, 0.5)), name=f"r{r}")
    return m.validate()


def knapsack_model() -> MipModel:
    """Pick from values (10, 6, 5) with weights (4, 3, 3) under capacity 6; optimum is -11."""
    m = MipModel("knapsack")
    for j, value in enumerate((10.0, 6.0, 5.0)):
        m.add_binary(f"b{j}")
        m.add_objective_linear(f"b{j}", -value)
    m.add_constraint({"b0": 4.0, "b1": 3.0, "b2": 3.0}, Sense.LE, 6.0, name="capacity")
    return m
