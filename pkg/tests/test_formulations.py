from dataclasses import replace

import numpy as np
import pytest

from ras_scopf.core.errors import ConfigError, ConsistencyError
from ras_scopf.core.network import Contingency, Generator
from ras_scopf.formulations import (
    OPF,
    RASAwareSCOPF,
    RASSCOPF,
    SCOPF,
    FormulationConfig,
    RasScheme,
    build_ras_aware_scopf,
    build_ras_scopf,
    extract_solution,
)
from ras_scopf.formulations.scheme import as_contingency
from ras_scopf.miqp.options import SolverOptions
from ras_scopf.miqp.solution import MipSolution, SolveStatus
from ras_scopf.miqp.solve import solve_model
from tests.conftest import make_network

HIGHS = SolverOptions(backend="highs")

# Parallel-lines case, worked by hand:
#   OPF puts all 100 MW on the cheap unit at bus 1: 0.01*100^2 + 10*100 = 1100.
#   Losing a line leaves the other at 100 MW on a 60 MW rating, so SCOPF
#   caps unit 1 at 60 MW: 36 + 600 + 16 + 1200 = 1852.
#   RAS-SCOPF keeps the OPF dispatch and trips unit 1 when a line is lost.
OPF_COST = 1100.0
SCOPF_COST = 1852.0


def test_as_contingency_forms():
    assert as_contingency(7) == Contingency.line(7)
    assert as_contingency("7+18") == Contingency(frozenset({7, 18}))
    assert as_contingency([18, 7]).name == "7+18"
    k = Contingency.line(3)
    assert as_contingency(k) is k


def test_scheme_validation(parallel_net):
    with pytest.raises(ConfigError):
        RasScheme(frozenset(), frozenset([1]))
    with pytest.raises(ConfigError):
        RasScheme(frozenset([1]), frozenset())
    with pytest.raises(ConfigError, match="plain token"):
        RasScheme(frozenset([1]), frozenset([1]), name="my scheme")
    scheme = RasScheme([1], [2], trip_set=[1], name="s")
    assert scheme.trip_capacity_mw(parallel_net) == 200.0
    assert scheme.protects(Contingency.line(2))
    assert not scheme.protects(Contingency.line(1))


def test_config_validation(parallel_scheme):
    with pytest.raises(ConfigError, match="gamma"):
        FormulationConfig(gamma=0.0)
    with pytest.raises(ConfigError, match="rho"):
        FormulationConfig(rho=-1.0)
    with pytest.raises(ConfigError, match="more than one scheme"):
        FormulationConfig(schemes=(parallel_scheme, replace(parallel_scheme, name="ras2")))
    with pytest.raises(ConfigError, match="unique"):
        FormulationConfig(
            schemes=(parallel_scheme, RasScheme(frozenset([1]), frozenset([9]), name="ras1"))
        )
    with pytest.raises(ConfigError, match="not in the contingency set"):
        FormulationConfig(schemes=(parallel_scheme,), contingencies=(1,))


def test_case_study_config():
    cfg = FormulationConfig.case_study()
    assert cfg.gamma == 5000.0
    assert cfg.rho == 1000.0
    assert cfg.big_m == 100.0
    assert cfg.monitored_lines == frozenset({23})
    assert sorted(k.name for k in cfg.protected) == ["18", "21", "22", "27", "29", "7"]
    assert cfg.balancing == frozenset(range(1, 17))


def test_opf(parallel_net):
    result = OPF(parallel_net).solve()
    assert result.is_optimal
    assert result.generation_cost == pytest.approx(OPF_COST, rel=1e-5)
    assert result.generation_mw[1] == pytest.approx(100.0, abs=1e-3)
    assert result.pre.flows_mw[1] == pytest.approx(50.0, abs=1e-3)
    assert result.intermediate == {}


def test_opf_with_highs_backend(parallel_net):
    result = OPF(parallel_net).solve(HIGHS)
    assert result.is_optimal
    assert result.generation_cost == pytest.approx(OPF_COST, abs=0.1)


def test_scopf(parallel_net, parallel_cfg):
    result = SCOPF(parallel_net, parallel_cfg).solve()
    assert result.is_optimal
    assert result.generation_cost == pytest.approx(SCOPF_COST, rel=1e-5)
    assert result.generation_mw[1] == pytest.approx(60.0, abs=1e-3)
    assert set(result.intermediate) == {Contingency.line(1), Contingency.line(2)}
    for state in result.intermediate.values():
        assert state.overloaded(parallel_net, tol=1e-6) == []
        assert state.droop_signal_mw == pytest.approx(0.0, abs=1e-4)
    assert result.post_ras == {}


def test_ras_scopf_designs_trip_of_cheap_unit(parallel_net, parallel_cfg):
    model = RASSCOPF(parallel_net, parallel_cfg).build()
    # two trip-vector entries, then per protected outage z1/z2/z3, y and two status binaries
    assert len(model.binaries) == 2 + 2 * 6

    result = RASSCOPF(parallel_net, parallel_cfg).solve()
    assert result.is_optimal
    assert result.scheme.trip_set == frozenset({1})
    assert result.generation_cost == pytest.approx(OPF_COST, rel=1e-5)
    assert result.objective == pytest.approx(OPF_COST + parallel_cfg.rho, rel=1e-5)
    assert result.total_shed_mw(parallel_net) == pytest.approx(0.0, abs=1e-3)

    outage = Contingency.line(1)
    trigger = result.triggers[outage]
    assert trigger.triggered
    assert trigger.overloaded == {2: 1}
    assert result.intermediate[outage].flows_mw[2] == pytest.approx(100.0, abs=1e-3)
    post = result.post_ras[outage]
    assert not post.generator_online[1]
    assert post.generation_mw[2] == pytest.approx(100.0, abs=1e-3)
    assert post.overloaded(parallel_net) == []
    # unit 2 carries half the droop, so the signal is twice the 100 MW it picks up
    assert post.droop_signal_mw == pytest.approx(200.0, abs=1e-3)


def test_cost_ordering(parallel_net, parallel_cfg):
    opf = OPF(parallel_net, parallel_cfg).solve()
    ras = RASSCOPF(parallel_net, parallel_cfg).solve()
    scopf = SCOPF(parallel_net, parallel_cfg).solve()
    assert opf.generation_cost <= ras.generation_cost + 1e-3
    assert ras.generation_cost <= scopf.generation_cost + 1e-3
    assert ras.cost_increase(opf) == pytest.approx(0.0, abs=1e-5)
    assert scopf.cost_increase(opf) == pytest.approx(SCOPF_COST / OPF_COST - 1.0, rel=1e-4)


def test_trip_penalty_is_paid_on_top_of_the_cheapest_dispatch(parallel_net, parallel_scheme):
    # every scheme trips at least one unit, so rho is paid even when it exceeds
    # the SCOPF premium; tripping unit 1 still keeps the OPF dispatch
    cfg = FormulationConfig(rho=2000.0, schemes=(parallel_scheme,))
    result = RASSCOPF(parallel_net, cfg).solve()
    assert result.is_optimal
    assert result.scheme.trip_set == frozenset({1})
    assert result.objective == pytest.approx(OPF_COST + 2000.0, rel=1e-5)


def test_balancing_units_cannot_be_tripped_when_disallowed(parallel_net, parallel_scheme):
    cfg = FormulationConfig(rho=10.0, schemes=(parallel_scheme,), allow_balancing_trip=False)
    result = RASSCOPF(parallel_net, cfg).solve()
    assert result.status is SolveStatus.INFEASIBLE
    assert result.pre is None
    assert result.generation_mw == {}


def test_ras_scopf_requires_a_scheme(parallel_net):
    with pytest.raises(ConfigError):
        RASSCOPF(parallel_net, FormulationConfig()).build()


def test_ras_aware_scopf(parallel_net, parallel_cfg, parallel_scheme):
    scheme = parallel_scheme.with_trip_set([1])
    result = RASAwareSCOPF(parallel_net, parallel_cfg, scheme).solve()
    assert result.is_optimal
    assert result.generation_cost == pytest.approx(OPF_COST, rel=1e-5)
    assert result.schemes == (scheme,)
    assert result.intermediate == {}
    # each unit covers its droop share of the 100 MW the scheme trips
    assert result.reserves_mw[1] >= 50.0 - 1e-3
    assert result.reserves_mw[2] >= 50.0 - 1e-3
    assert result.generation_mw[1] + result.reserves_mw[1] <= 200.0 + 1e-3


def test_ras_aware_scopf_secures_unprotected_outages(triangle_net):
    scheme = RasScheme([1], [3], trip_set=[2], name="spur")
    model = build_ras_aware_scopf(triangle_net, FormulationConfig(schemes=(scheme,)))
    assert model.has_variable("th[i,1,1]")
    assert model.has_variable("th[i,2,1]")
    assert not model.has_variable("th[i,3,1]")
    assert not model.has_variable("th[i,4,1]")
    assert model.has_variable("dpg[spur]")
    assert model.has_variable("r[2]")
    assert not model.binaries


def test_formulations_agree_across_backends(parallel_net, parallel_cfg):
    exact = SCOPF(parallel_net, parallel_cfg).solve()
    linear = SCOPF(parallel_net, parallel_cfg).solve(HIGHS)
    assert linear.is_optimal
    assert linear.generation_cost == pytest.approx(exact.generation_cost, abs=0.5)
    ras = RASSCOPF(parallel_net, parallel_cfg).solve(HIGHS)
    assert ras.is_optimal
    assert ras.scheme.trip_set == frozenset({1})


def test_extraction_detects_inconsistent_angles(parallel_net):
    model = OPF(parallel_net).build()
    solution = solve_model(model)
    values = solution.values.copy()
    values[model.index("th[o,2]")] += 0.01
    tampered = MipSolution(SolveStatus.OPTIMAL, values=values, objective=solution.objective, names=solution.names)
    with pytest.raises(ConsistencyError, match="deviates"):
        extract_solution(model, tampered, parallel_net, FormulationConfig())


def test_extraction_refuses_non_optimal(parallel_net):
    model = OPF(parallel_net).build()
    with pytest.raises(ConsistencyError):
        extract_solution(model, MipSolution(SolveStatus.INFEASIBLE), parallel_net, FormulationConfig())


def test_cost_constant_can_be_excluded(parallel_net):
    gens = [replace(g, cost_const=50.0) for g in parallel_net.generators]
    net = parallel_net.with_generators(gens)
    with_constant = OPF(net).solve()
    without = OPF(net, FormulationConfig(include_cost_constant=False)).solve()
    assert with_constant.generation_cost == pytest.approx(OPF_COST + 100.0, rel=1e-5)
    assert without.generation_cost == pytest.approx(OPF_COST, rel=1e-5)
    assert with_constant.objective - without.objective == pytest.approx(100.0, abs=1e-3)


def test_rts96_ras_scopf_model_size(rts96_prepared):
    model = build_ras_scopf(rts96_prepared, FormulationConfig.case_study())
    # 33 trip entries; per protected outage 3 trigger binaries on line 23, y and 33 statuses
    assert len(model.binaries) == 33 + 6 * (3 + 1 + 33)
    assert model.has_variable("zgj[ras1,22]")
    assert model.has_variable("z1[ras1,7,23]")
    assert model.has_variable("pd[c,7,3]")
    assert not model.has_variable("th[c,23,1]")
    assert not model.has_variable("pg[i,11,1]")


@pytest.mark.slow
def test_rts96_cost_comparison(rts96_prepared):
    cfg = FormulationConfig.case_study()
    opf = OPF(rts96_prepared, cfg).solve()
    ras = RASSCOPF(rts96_prepared, cfg).solve()
    scopf = SCOPF(rts96_prepared, cfg).solve()
    assert opf.generation_cost == pytest.approx(61001.2, rel=2e-3)
    assert ras.generation_cost == pytest.approx(62784.0, rel=2e-3)
    assert scopf.generation_cost == pytest.approx(68197.4, rel=2e-3)
    assert ras.scheme.trip_set == frozenset({22})
    assert ras.total_shed_mw(rts96_prepared) == pytest.approx(0.0, abs=1e-3)
    assert ras.cost_increase(opf) == pytest.approx(0.0292, abs=1e-3)
    assert scopf.cost_increase(opf) == pytest.approx(0.118, abs=2e-3)
    assert np.isfinite(ras.objective)


def _random_parallel_case(seed):
    """Two buses and two lines with random ratings, reactances, costs and load.

    Losing either line can overload the other, and tripping the cheap unit at
    bus 1 always clears the overload, so every formulation stays feasible.
    """
    rng = np.random.default_rng(seed)
    load = float(rng.uniform(80.0, 120.0))
    ratings = rng.uniform(0.55, 0.95, size=2) * load
    reactances = rng.uniform(0.05, 0.3, size=2)
    net = make_network(
        buses=[(1, 0.0), (2, load)],
        lines=[(l + 1, 1, 2, float(reactances[l]), float(ratings[l])) for l in range(2)],
        generators=[
            Generator(1, 1, 0.0, 200.0, float(rng.uniform(0.005, 0.02)), float(rng.uniform(5.0, 15.0)), participation=0.5),
            Generator(2, 2, 0.0, 200.0, float(rng.uniform(0.005, 0.02)), float(rng.uniform(20.0, 40.0)), participation=0.5),
        ],
        name=f"parallel_{seed}",
    )
    scheme = RasScheme(frozenset([1, 2]), frozenset([1, 2]), name="ras1")
    return net, FormulationConfig(rho=float(rng.uniform(5.0, 50.0)), schemes=(scheme,))


@pytest.mark.parametrize("seed", range(20))
def test_randomized_ras_scopf_invariants(seed):
    net, cfg = _random_parallel_case(seed)
    opf = OPF(net, cfg).solve()
    scopf = SCOPF(net, cfg).solve()
    ras = RASSCOPF(net, cfg).solve()
    assert opf.is_optimal and scopf.is_optimal and ras.is_optimal

    # cost ordering
    assert opf.generation_cost <= ras.generation_cost + 1e-2
    assert ras.generation_cost <= scopf.generation_cost + 1e-2

    factors = net.participation()
    for k, trigger in ras.triggers.items():
        intermediate, post = ras.intermediate[k], ras.post_ras[k]
        worst = max(intermediate.loading(net)[l] for l in trigger.overloaded)
        # the trigger fires exactly on monitored overloads; at the limit either reading is sound
        if worst > 1.0 + 1e-4:
            assert trigger.triggered
        if trigger.triggered:
            assert worst >= 1.0 - 1e-4
            assert {g for g, on in post.generator_online.items() if not on} == ras.scheme.trip_set
        else:
            assert all(post.generator_online.values())
            assert ras.shed_mw(net, k) == pytest.approx(0.0, abs=1e-3)
        for g, on in post.generator_online.items():
            if on:
                expected = intermediate.generation_mw[g] + factors[g] * post.droop_signal_mw
                assert post.generation_mw[g] == pytest.approx(expected, abs=1e-3)
            else:
                assert post.generation_mw[g] == pytest.approx(0.0, abs=1e-3)
        for g, p in intermediate.generation_mw.items():
            expected = ras.pre.generation_mw[g] + factors[g] * intermediate.droop_signal_mw
            assert p == pytest.approx(expected, abs=1e-3)
        assert not post.overloaded(net, tol=1e-4)


@pytest.mark.slow
def test_rts96_linearized_costs_stay_in_band(rts96_prepared):
    cfg = FormulationConfig.case_study()
    options = SolverOptions(backend="highs", segments=64)
    for formulation, expected in ((OPF, 61001.2), (RASSCOPF, 62784.0), (SCOPF, 68197.4)):
        solution = formulation(rts96_prepared, cfg).solve(options)
        assert solution.is_optimal
        assert solution.generation_cost == pytest.approx(expected, rel=5e-3)
