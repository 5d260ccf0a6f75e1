from .config import FormulationConfig
from .scheme import RasScheme
from .solution import DispatchSolution, StageState, TriggerState, extract_solution
from .base import Formulation
from .opf import OPF, build_opf
from .scopf import SCOPF, build_scopf
from .ras_scopf import RASSCOPF, build_ras_scopf
from .ras_aware_scopf import RASAwareSCOPF, build_ras_aware_scopf

FORMULATIONS = {
    OPF.name: OPF,
    SCOPF.name: SCOPF,
    RASSCOPF.name: RASSCOPF,
    RASAwareSCOPF.name: RASAwareSCOPF,
}

__all__ = [
    "FORMULATIONS",
    "DispatchSolution",
    "Formulation",
    "FormulationConfig",
    "OPF",
    "RASAwareSCOPF",
    "RASSCOPF",
    "RasScheme",
    "SCOPF",
    "StageState",
    "TriggerState",
    "build_opf",
    "build_ras_aware_scopf",
    "build_ras_scopf",
    "build_scopf",
    "extract_solution",
]
