from dataclasses import replace

import numpy as np
import pytest

from ras_scopf.core.errors import NetworkValidationError
from ras_scopf.core.network import (
    CASE_STUDY_BALANCING,
    Bus,
    Contingency,
    Generator,
    Line,
    Network,
    compute_radial_flags,
    find_islands,
    non_radial_contingencies,
    participation_factors,
    prepare_paper_case,
    susceptance_matrices,
)
from tests.conftest import make_network


def test_rts96_shape(rts96):
    assert len(rts96.buses) == 24
    assert len(rts96.lines) == 38
    assert len(rts96.generators) == 33
    assert rts96.total_load_mw == pytest.approx(2850.0)
    assert rts96.radial_lines() == [11]
    assert rts96.generator(22).bus == 16
    assert rts96.generator(22).p_max_mw == 155.0


def test_line_susceptance_sign():
    line = Line(1, 1, 2, 0.25, 100.0)
    assert line.susceptance_pu == pytest.approx(-4.0)


def test_generator_cost():
    gen = Generator(1, 1, 0.0, 100.0, cost_quad=0.01, cost_lin=10.0, cost_const=5.0)
    assert gen.cost(50.0) == pytest.approx(0.01 * 2500 + 500 + 5)


def test_contingency_name_is_sorted():
    outage = Contingency(frozenset([18, 7]))
    assert outage.name == "7+18"
    assert outage.sort_key == (7, 18)
    with pytest.raises(NetworkValidationError):
        Contingency(frozenset())


@pytest.mark.parametrize(
    "mutate, message",
    [
        (lambda n: replace(n, buses=n.buses + (Bus(n.buses[-1].id + 2),)), "contiguous"),
        (lambda n: n.with_lines([replace(n.lines[0], rating_mw=0.0)] + list(n.lines[1:])), "rating_mw"),
        (lambda n: n.with_lines([replace(n.lines[0], to_bus=99)] + list(n.lines[1:])), "unknown bus"),
        (lambda n: n.with_lines([replace(n.lines[0], reactance_pu=0.0)] + list(n.lines[1:])), "reactance"),
        (lambda n: n.with_lines([replace(n.lines[0], radial=True)] + list(n.lines[1:])), "radial"),
        (
            lambda n: n.with_generators([replace(n.generators[0], p_min_mw=500.0)] + list(n.generators[1:])),
            "p_min_mw",
        ),
        (
            lambda n: n.with_generators([replace(n.generators[0], participation=0.9)] + list(n.generators[1:])),
            "participation",
        ),
    ],
)
def test_validation_rejects(triangle_net, mutate, message):
    with pytest.raises(NetworkValidationError, match=message):
        mutate(triangle_net)


def test_radial_flags(triangle_net):
    assert triangle_net.radial_lines() == [4]
    assert [k.name for k in non_radial_contingencies(triangle_net)] == ["1", "2", "3"]


def test_radial_flag_respects_parallel_lines(parallel_net):
    assert parallel_net.radial_lines() == []
    flagged = compute_radial_flags(parallel_net.buses, [parallel_net.lines[0]])
    assert flagged[0].radial


def test_islands(triangle_net):
    assert find_islands(triangle_net) == [frozenset({1, 2, 3, 4})]
    assert find_islands(triangle_net, [4]) == [frozenset({1, 2, 3}), frozenset({4})]
    assert find_islands(triangle_net, [1, 3]) == [frozenset({1}), frozenset({2, 3, 4})]


def test_susceptance_matrices(triangle_net):
    bmat = susceptance_matrices(triangle_net)
    assert isinstance(bmat.bus, np.ndarray) and isinstance(bmat.branch, np.ndarray)
    assert bmat.line_ids == (1, 2, 3, 4)
    np.testing.assert_allclose(bmat.bus, bmat.bus.T)
    np.testing.assert_allclose(bmat.bus.sum(axis=1), 0.0, atol=1e-12)
    assert bmat.bus[0, 0] == pytest.approx(20.0)

    without = susceptance_matrices(triangle_net, [3])
    assert without.line_ids == (1, 2, 4)
    assert without.bus[0, 0] == pytest.approx(10.0)


def test_participation_factors(rts96):
    factors = participation_factors(rts96, CASE_STUDY_BALANCING)
    assert sum(factors.values()) == pytest.approx(1.0)
    assert all(factors[g] == 0.0 for g in range(17, 34))
    assert factors[3] / factors[1] == pytest.approx(76.0 / 20.0)
    with pytest.raises(NetworkValidationError):
        participation_factors(rts96, [])
    with pytest.raises(NetworkValidationError):
        participation_factors(rts96, [99])


def test_prepare_paper_case(rts96, rts96_prepared):
    assert rts96_prepared.prepared
    assert rts96_prepared.line(23).rating_mw == pytest.approx(0.8 * rts96.line(23).rating_mw)
    assert rts96_prepared.line(11).rating_mw == pytest.approx(1.5 * rts96.line(11).rating_mw)
    assert sum(rts96_prepared.participation().values()) == pytest.approx(1.0)
    with pytest.raises(NetworkValidationError, match="already"):
        prepare_paper_case(rts96_prepared)


def test_prepare_rejects_wrong_radial_line(rts96):
    with pytest.raises(NetworkValidationError, match="must connect"):
        prepare_paper_case(rts96, radial_line=23)


def test_with_loads_keeps_unlisted_buses(triangle_net):
    scaled = triangle_net.with_loads({2: 30.0})
    assert scaled.loads == {1: 0.0, 2: 30.0, 3: 90.0, 4: 20.0}
    assert triangle_net.loads[2] == 60.0


def test_network_is_sorted():
    buses = [Bus(2, 10.0), Bus(1)]
    lines = compute_radial_flags(buses, [Line(1, 1, 2, 0.1, 50.0)])
    net = Network(buses=tuple(buses), lines=tuple(lines), generators=(Generator(1, 1, 0.0, 20.0),))
    assert net.bus_ids == [1, 2]
    assert net.bus_position(2) == 1


def test_make_network_helper_builds_valid_networks():
    net = make_network([(1, 0.0), (2, 5.0)], [(1, 1, 2, 0.1, 10.0)], [Generator(1, 1, 0.0, 10.0)])
    assert net.radial_lines() == [1]
