from typing import Optional

from ras_scopf.core.network import Network
from ras_scopf.formulations.base import Formulation
from ras_scopf.formulations.config import FormulationConfig
from ras_scopf.miqp.model import MipModel


class OPF(Formulation):
    """Economic dispatch with pre-contingency network limits only."""

    name = "opf"

    def build(self) -> MipModel:
        m = MipModel(f"opf_{self.net.name}")
        self._add_pre_stage(m)
        return m.validate()


def build_opf(net: Network, cfg: Optional[FormulationConfig] = None) -> MipModel:
    return OPF(net, cfg).build()
