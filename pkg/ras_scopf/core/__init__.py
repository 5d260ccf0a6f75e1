from .errors import (
    CascadeError,
    CaseFormatError,
    ConfigError,
    ConsistencyError,
    ImbalanceError,
    ModelError,
    NetworkValidationError,
    RasScopfError,
    SingularNetworkError,
    SolverFailedError,
)
from .network import (
    Bus,
    Contingency,
    Generator,
    Line,
    Network,
    find_islands,
    non_radial_contingencies,
    participation_factors,
    prepare_paper_case,
    susceptance_matrices,
)
from .case_reader import parse_case, write_case
from .dcpf import FlowSolution, injection_vector, overloaded_lines, solve_island, solve_network

__all__ = [
    "Bus",
    "CascadeError",
    "CaseFormatError",
    "ConfigError",
    "ConsistencyError",
    "Contingency",
    "FlowSolution",
    "Generator",
    "ImbalanceError",
    "Line",
    "ModelError",
    "Network",
    "NetworkValidationError",
    "RasScopfError",
    "SingularNetworkError",
    "SolverFailedError",
    "find_islands",
    "injection_vector",
    "non_radial_contingencies",
    "overloaded_lines",
    "parse_case",
    "participation_factors",
    "prepare_paper_case",
    "solve_island",
    "solve_network",
    "susceptance_matrices",
    "write_case",
]
