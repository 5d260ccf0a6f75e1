import logging
from typing import Optional

from ras_scopf.core.network import Network
from ras_scopf.formulations.base import Formulation
from ras_scopf.formulations.config import FormulationConfig
from ras_scopf.miqp.model import MipModel

logger = logging.getLogger(__name__)


class SCOPF(Formulation):
    """
    Preventive security-constrained dispatch.

    Every contingency gets an intermediate stage with droop redispatch and
    enforced line limits; RAS schemes in the configuration are ignored, so no
    contingency is exempt.
    """

    name = "scopf"

    def build(self) -> MipModel:
        m = MipModel(f"scopf_{self.net.name}")
        self._add_pre_stage(m)
        contingencies = self.cfg.with_schemes(()).contingency_set(self.net)
        if contingencies:
            factors = self.cfg.participation(self.net)
            for contingency in contingencies:
                self._add_intermediate_stage(m, contingency, factors, enforce_limits=True)
        logger.info("SCOPF on %s: %d contingencies, %r", self.net.name, len(contingencies), m)
        return m.validate()


def build_scopf(net: Network, cfg: Optional[FormulationConfig] = None) -> MipModel:
    return SCOPF(net, cfg).build()
