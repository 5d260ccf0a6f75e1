from pathlib import Path

import pytest

from ras_scopf.core.errors import ConfigError
from ras_scopf.core.network import Contingency
from ras_scopf.experiments.settings import load_settings, settings_from_dict

CASE_STUDY_CONFIG = Path(__file__).resolve().parents[1] / "paper.yaml"


def test_defaults_reproduce_the_case_study():
    settings = settings_from_dict({})
    assert settings.formulation.gamma == 5000.0
    assert settings.formulation.monitored_lines == frozenset({23})
    assert settings.solver.backend == "branch_and_bound"
    assert settings.cascade.solver.backend == "highs"
    assert settings.scenarios.name == "small"
    assert settings.workers == 1
    assert settings.case.path.name == "rts96.case"


def test_case_study_file():
    settings = load_settings(CASE_STUDY_CONFIG)
    assert settings.case.path.is_absolute()
    assert settings.case.path.exists()
    assert settings.case.rating_scale == 0.8
    assert settings.formulation.rho == 1000.0
    assert settings.formulation.balancing == frozenset(range(1, 17))
    scheme = settings.formulation.schemes[0]
    assert scheme.name == "ras1"
    assert scheme.monitored_lines == frozenset({23})
    assert Contingency.line(29) in scheme.protected
    assert settings.scenarios.seed == 2017
    assert settings.scenarios.total_load_mw == 2850
    assert settings.solver.segments == 64


def test_case_study_file_loads_prepared_network():
    net = load_settings(CASE_STUDY_CONFIG).load_network()
    assert net.prepared
    assert len(net.lines) == 38


@pytest.mark.parametrize(
    "raw, match",
    [
        ({"plots": {}}, "unknown configuration sections"),
        ({"formulation": {"gama": 1}}, "unknown keys"),
        ({"solver": {"backend": "gurobi"}}, "unknown solver backend"),
        ({"output": {"workers": 0}}, "workers"),
        ({"cascade": {"failure_fraction": 2.0}}, "failure_fraction"),
        ({"formulation": {"schemes": [{"monitored_lines": [23]}]}}, "missing 'protected'"),
        ({"formulation": {"schemes": [{"monitored_lines": [23], "protected": [7], "x": 1}]}}, "unknown keys"),
        ({"scenarios": {"distribution": "huge"}}, "unknown distribution"),
        ({"case": [1]}, "must be a mapping"),
    ],
)
def test_invalid_settings(raw, match):
    with pytest.raises(ConfigError, match=match):
        settings_from_dict(raw)


def test_root_must_be_a_mapping():
    with pytest.raises(ConfigError, match="root"):
        settings_from_dict([1, 2])


def test_custom_scenario_bounds():
    settings = settings_from_dict({"scenarios": {"low": 0.8, "high": 1.2, "count": 7}})
    assert (settings.scenarios.low, settings.scenarios.high) == (0.8, 1.2)
    assert settings.scenarios.name == "custom"
    assert settings.scenarios.count == 7


def test_scheme_with_trip_set_and_ranges():
    settings = settings_from_dict(
        {
            "formulation": {
                "balancing": "1-4",
                "schemes": [{"name": "west", "monitored_lines": "23,28", "protected": [7, "18+21"], "trip_set": [22]}],
            }
        }
    )
    scheme = settings.formulation.schemes[0]
    assert scheme.monitored_lines == frozenset({23, 28})
    assert Contingency(frozenset({18, 21})) in scheme.protected
    assert scheme.trip_set == frozenset({22})
    assert settings.formulation.balancing == frozenset({1, 2, 3, 4})


def test_invalid_yaml(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("formulation: [gamma: 1\n")
    with pytest.raises(ConfigError, match="invalid YAML"):
        load_settings(path)


def test_relative_case_path(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("case:\n  path: cases/mine.case\noutput:\n  workers: 3\n")
    settings = load_settings(path)
    assert settings.case.path == (tmp_path / "cases" / "mine.case").resolve()
    assert settings.workers == 3


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_settings(path).formulation.rho == 1000.0
