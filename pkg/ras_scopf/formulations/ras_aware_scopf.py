import logging
from typing import Optional

from ras_scopf.core.errors import ConfigError
from ras_scopf.core.network import Network
from ras_scopf.formulations.base import Formulation
from ras_scopf.formulations.config import FormulationConfig
from ras_scopf.formulations.scheme import RasScheme
from ras_scopf.formulations.solution import DispatchSolution
from ras_scopf.formulations.variables import PRE, dpg_name, pg_name, r_name
from ras_scopf.miqp.model import MipModel, Sense
from ras_scopf.miqp.options import SolverOptions

logger = logging.getLogger(__name__)


class RASAwareSCOPF(Formulation):
    """
    Continuous SCOPF that relies on a fixed RAS scheme.

    Contingencies protected by the scheme are dropped from the security
    constraints. Each generator instead keeps a reserve ``r_i`` large enough
    to absorb its droop share ``K_i * dP`` of the generation ``dP`` the scheme
    trips.
    """

    name = "ras-aware-scopf"

    def __init__(
        self,
        net: Network,
        cfg: Optional[FormulationConfig] = None,
        scheme: Optional[RasScheme] = None,
    ):
        super().__init__(net, cfg)
        if scheme is None:
            if not self.cfg.schemes:
                raise ConfigError("RAS-aware SCOPF needs a RAS scheme")
            scheme = self.cfg.schemes[0]
        self.scheme = scheme.validate(net)

    def build(self) -> MipModel:
        m = MipModel(f"ras_aware_scopf_{self.net.name}")
        self._add_pre_stage(m)
        factors = self.cfg.participation(self.net)
        contingencies = [
            k for k in self.cfg.contingency_set(self.net) if not self.scheme.protects(k)
        ]
        for contingency in contingencies:
            self._add_intermediate_stage(m, contingency, factors, enforce_limits=True)

        tripped = dpg_name(self.scheme.name)
        m.add_variable(tripped, 0.0)
        m.add_constraint(
            {tripped: 1.0, **{pg_name(PRE, g): -1.0 for g in sorted(self.scheme.trip_set)}},
            Sense.EQ,
            0.0,
            name=f"tripped[{self.scheme.name}]",
        )
        for gen in self.generators:
            reserve = r_name(gen.id)
            m.add_variable(reserve, 0.0)
            m.add_constraint(
                {pg_name(PRE, gen.id): 1.0, reserve: 1.0},
                Sense.LE,
                gen.p_max_mw / self.base,
                name=f"headroom[{gen.id}]",
            )
            m.add_constraint(
                {reserve: 1.0, tripped: -factors[gen.id]},
                Sense.GE,
                0.0,
                name=f"reserve[{gen.id}]",
            )
        logger.info(
            "RAS-aware SCOPF on %s: %d secured contingencies, scheme %s, %r",
            self.net.name,
            len(contingencies),
            self.scheme,
            m,
        )
        return m.validate()

    def solve(self, options: Optional[SolverOptions] = None) -> DispatchSolution:
        result = super().solve(options)
        result.schemes = (self.scheme,)
        return result


def build_ras_aware_scopf(
    net: Network,
    cfg: Optional[FormulationConfig] = None,
    scheme: Optional[RasScheme] = None,
) -> MipModel:
    return RASAwareSCOPF(net, cfg, scheme).build()
