from .branch_and_bound import BranchAndBound, branch_and_bound
from .highs import solve_highs
from .linearize import linearize_objective, secant_error_bound
from .model import LinearConstraint, MipModel, ModelArrays, Sense, Variable, VarKind
from .mps import export_mps, read_mps
from .options import SolverOptions
from .relaxation import RelaxationSolver, solve_relaxation
from .solution import MipSolution, SolveStatus
from .solve import solve_model

__all__ = [
    "BranchAndBound",
    "branch_and_bound",
    "solve_highs",
    "linearize_objective",
    "secant_error_bound",
    "LinearConstraint",
    "MipModel",
    "ModelArrays",
    "Sense",
    "Variable",
    "VarKind",
    "export_mps",
    "read_mps",
    "SolverOptions",
    "RelaxationSolver",
    "solve_relaxation",
    "MipSolution",
    "SolveStatus",
    "solve_model",
]
