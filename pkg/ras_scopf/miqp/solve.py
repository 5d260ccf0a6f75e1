from typing import Optional

from ras_scopf.miqp.branch_and_bound import branch_and_bound
from ras_scopf.miqp.highs import solve_highs
from ras_scopf.miqp.model import MipModel
from ras_scopf.miqp.options import SolverOptions
from ras_scopf.miqp.solution import MipSolution


def solve_model(m: MipModel, options: Optional[SolverOptions] = None) -> MipSolution:
    """Solves ``m`` with the backend named in ``options`` (branch-and-bound by default)."""
    options = options or SolverOptions()
    if options.backend == "highs":
        return solve_highs(m, options)
    return branch_and_bound(m, options)
