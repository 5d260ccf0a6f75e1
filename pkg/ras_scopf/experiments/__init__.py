from .scenarios import DISTRIBUTIONS, ScenarioSpec, generate_scenarios
from .reports import ExperimentReport
from .settings import Settings, load_settings, settings_from_dict
from .harness import (
    compare_formulations,
    design_scheme,
    find_critical_contingencies,
    sensitivity_study,
)
from .cli import main

__all__ = [
    "DISTRIBUTIONS",
    "ExperimentReport",
    "ScenarioSpec",
    "Settings",
    "compare_formulations",
    "design_scheme",
    "find_critical_contingencies",
    "generate_scenarios",
    "load_settings",
    "main",
    "sensitivity_study",
    "settings_from_dict",
]
