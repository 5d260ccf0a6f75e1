import pytest

from ras_scopf.cascade import SystemState, build_redispatch_model, redispatch_island
from ras_scopf.core.network import Generator
from tests.conftest import make_network

RING = frozenset({1, 2, 3})


@pytest.fixture
def state(triangle_net):
    return SystemState.from_dispatch(triangle_net, {1: 150.0, 2: 20.0})


def test_island_without_generation_is_blacked_out(triangle_net, state):
    after = redispatch_island(triangle_net, state, {4})
    assert after.load_mw[4] == 0.0
    assert after.load_mw[3] == 90.0
    assert state.load_mw[4] == 20.0


def test_surplus_is_absorbed_by_droop(triangle_net, state):
    # without the spur load the ring has 20 MW too much, shared 0.6 / 0.4
    after = redispatch_island(triangle_net, state, RING)
    assert after.generation_mw[1] == pytest.approx(138.0, abs=1e-4)
    assert after.generation_mw[2] == pytest.approx(12.0, abs=1e-4)
    assert after.generator_status == {1: True, 2: True}
    assert sum(after.load_mw[b] for b in RING) == pytest.approx(150.0, abs=1e-4)


def test_unit_that_cannot_follow_droop_is_tripped(triangle_net):
    # following the droop would take unit 2 to 7.2 MW, below its 10 MW minimum
    state = SystemState.from_dispatch(triangle_net, {1: 150.0, 2: 12.0})
    after = redispatch_island(triangle_net, state, RING)
    assert not after.generator_status[2]
    assert after.generation_mw[2] == 0.0
    assert after.generation_mw[1] == pytest.approx(150.0, abs=1e-4)
    assert sum(after.load_mw[b] for b in RING) == pytest.approx(150.0, abs=1e-4)


def test_deficit_beyond_capacity_sheds_load(triangle_net, state):
    state.generator_status[1] = False
    state.generation_mw[1] = 0.0
    after = redispatch_island(triangle_net, state, RING)
    assert after.generation_mw[2] == pytest.approx(100.0, abs=1e-4)
    shed = sum(state.load_mw[b] - after.load_mw[b] for b in RING)
    assert shed == pytest.approx(50.0, abs=1e-4)
    assert not after.generator_status[1]


def test_offline_units_stay_offline(triangle_net, state):
    state.generator_status[1] = False
    state.generation_mw[1] = 0.0
    model = build_redispatch_model(triangle_net, state, RING)
    z1 = model.variable(model.index("z[1]"))
    assert (z1.lb, z1.ub) == (0.0, 0.0)
    z2 = model.variable(model.index("z[2]"))
    assert (z2.lb, z2.ub) == (0.0, 1.0)
    assert not model.has_variable("pd[4]")
    assert model.has_variable("s")


def test_participation_override(triangle_net, state):
    after = redispatch_island(triangle_net, state, RING, participation={1: 1.0, 2: 0.0})
    assert after.generation_mw[1] == pytest.approx(130.0, abs=1e-4)
    assert after.generation_mw[2] == pytest.approx(20.0, abs=1e-4)


@pytest.fixture
def shared_bus_net():
    # both units at bus 1 feeding 160 MW at bus 2
    return make_network(
        buses=[(1, 0.0), (2, 160.0)],
        lines=[(1, 1, 2, 0.1, 500.0)],
        generators=[
            Generator(1, 1, 0.0, 100.0, participation=0.5),
            Generator(2, 1, 0.0, 200.0, participation=0.5),
        ],
        name="shared",
    )


def test_small_deficit_sheds_rather_than_trips(shared_bus_net):
    # unit 1 is at its limit, so closing the 10 MW gap by droop means tripping
    # it; 0.1 p.u. of shed is cheaper than one trip
    state = SystemState.from_dispatch(shared_bus_net, {1: 100.0, 2: 50.0})
    after = redispatch_island(shared_bus_net, state, {1, 2})
    assert after.generator_status == {1: True, 2: True}
    assert after.generation_mw[1] == pytest.approx(100.0, abs=1e-4)
    assert after.generation_mw[2] == pytest.approx(50.0, abs=1e-4)
    assert after.load_mw[2] == pytest.approx(150.0, abs=1e-4)


def test_large_deficit_trips_the_unit_at_its_limit():
    # 150 MW short: shedding costs 1.5 p.u., tripping unit 1 costs one trip
    # and lets unit 2 carry the whole 300 MW
    net = make_network(
        buses=[(1, 0.0), (2, 300.0)],
        lines=[(1, 1, 2, 0.1, 500.0)],
        generators=[
            Generator(1, 1, 0.0, 100.0, participation=0.5),
            Generator(2, 1, 0.0, 400.0, participation=0.5),
        ],
    )
    state = SystemState.from_dispatch(net, {1: 100.0, 2: 50.0})
    after = redispatch_island(net, state, {1, 2})
    assert after.generator_status == {1: False, 2: True}
    assert after.generation_mw[2] == pytest.approx(300.0, abs=1e-4)
    assert after.load_mw[2] == pytest.approx(300.0, abs=1e-4)


def test_model_is_built_in_per_unit(shared_bus_net):
    state = SystemState.from_dispatch(shared_bus_net, {1: 100.0, 2: 50.0})
    model = build_redispatch_model(shared_bus_net, state, {1, 2})
    pg2 = model.variable(model.index("pg[2]"))
    assert pg2.ub == pytest.approx(2.0)
    pd2 = model.variable(model.index("pd[2]"))
    assert pd2.ub == pytest.approx(1.6)
