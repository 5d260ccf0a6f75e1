from .core import (
    Contingency,
    Network,
    RasScopfError,
    find_islands,
    non_radial_contingencies,
)
from .core.case_reader import parse_case, write_case
from .core.network import prepare_paper_case
from .miqp import MipModel, MipSolution, SolverOptions, SolveStatus, solve_model
from .formulations import (
    OPF,
    RASAwareSCOPF,
    RASSCOPF,
    SCOPF,
    DispatchSolution,
    FormulationConfig,
    RasScheme,
)
from .cascade import CascadeOptions, CascadeResult, run_cascade
from .experiments import (
    ExperimentReport,
    ScenarioSpec,
    compare_formulations,
    find_critical_contingencies,
    generate_scenarios,
    load_settings,
    sensitivity_study,
)

__all__ = [
    "CascadeOptions",
    "CascadeResult",
    "Contingency",
    "DispatchSolution",
    "ExperimentReport",
    "FormulationConfig",
    "MipModel",
    "MipSolution",
    "Network",
    "OPF",
    "RASAwareSCOPF",
    "RASSCOPF",
    "RasScheme",
    "RasScopfError",
    "SCOPF",
    "ScenarioSpec",
    "SolveStatus",
    "SolverOptions",
    "compare_formulations",
    "find_critical_contingencies",
    "find_islands",
    "generate_scenarios",
    "load_settings",
    "non_radial_contingencies",
    "parse_case",
    "prepare_paper_case",
    "run_cascade",
    "sensitivity_study",
    "solve_model",
    "write_case",
]
