"""RAS-SCOPF: co-optimized dispatch and generator-trip RAS design."""

import logging
from typing import Dict, Optional

import numpy as np

from ras_scopf.core.errors import ConfigError
from ras_scopf.core.network import Contingency, Network
from ras_scopf.formulations.base import Formulation
from ras_scopf.formulations.config import FormulationConfig
from ras_scopf.formulations.scheme import RasScheme
from ras_scopf.formulations.variables import (
    POST_RAS,
    dlt_name,
    pd_name,
    pg_name,
    stage_key,
    trigger_name,
    y_name,
    zg_name,
    zgj_name,
)
from ras_scopf.miqp.model import MipModel, Sense

logger = logging.getLogger(__name__)


class RASSCOPF(Formulation):
    """
    Mixed-integer dispatch that designs the trip set of each RAS scheme.

    Contingencies protected by a scheme skip the intermediate line limits.
    Instead, big-M binaries detect overloads of the monitored lines, a
    trigger binary per (scheme, contingency) fires when any monitored line is
    overloaded, and the post-RAS stage trips the scheme's shared trip set,
    may shed load and must then satisfy every line limit.
    """

    name = "ras-scopf"

    def build(self) -> MipModel:
        if not self.cfg.schemes:
            raise ConfigError("RAS-SCOPF needs at least one RAS scheme")
        for scheme in self.cfg.schemes:
            scheme.validate(self.net)

        m = MipModel(f"ras_scopf_{self.net.name}")
        self._add_pre_stage(m)
        factors = self.cfg.participation(self.net)
        for scheme in self.cfg.schemes:
            self._add_trip_set(m, scheme, factors)

        contingencies = self.cfg.contingency_set(self.net)
        for contingency in contingencies:
            scheme = self.cfg.scheme_for(contingency)
            key = self._add_intermediate_stage(m, contingency, factors, enforce_limits=scheme is None)
            if scheme is not None:
                self._add_trigger(m, scheme, contingency, key)
                self._add_post_ras_stage(m, scheme, contingency, key, factors)

        logger.info(
            "RAS-SCOPF on %s: %d contingencies, %d protected, %r",
            self.net.name,
            len(contingencies),
            len(self.cfg.protected),
            m,
        )
        return m.validate()

    def _add_trip_set(self, m: MipModel, scheme: RasScheme, factors: Dict[int, float]) -> None:
        """Shared trip vector: 0 marks a tripped unit; at least one unit is tripped."""
        for gen in self.generators:
            name = zgj_name(scheme.name, gen.id)
            m.add_binary(name)
            if not self.cfg.allow_balancing_trip and factors[gen.id] > 0:
                m.set_bounds(name, 1.0, 1.0)
            m.add_objective_linear(name, -self.cfg.rho)
            m.add_objective_constant(self.cfg.rho)
        m.add_constraint(
            {zgj_name(scheme.name, g.id): 1.0 for g in self.generators},
            Sense.LE,
            len(self.generators) - 1,
            name=f"tripcard[{scheme.name}]",
        )

    def _add_trigger(self, m: MipModel, scheme: RasScheme, contingency: Contingency, key: str) -> None:
        """
        Overload detection on the monitored lines of the intermediate stage.

        z1 = 1 iff the flow exceeds the rating in the positive direction, z2
        in the negative direction, z3 = z1 or z2; y = 1 iff some z3 = 1. A flow
        exactly at the rating admits either value.
        """
        big_m = self.cfg.big_m
        indicators = {}
        for line_id in sorted(scheme.monitored_lines):
            if line_id in contingency.outaged_lines:
                continue
            line = self.net.line(line_id)
            rating = line.rating_mw / self.base
            flow = self._flow_terms(line, key)
            reverse = self._flow_terms(line, key, -1.0)
            z1, z2, z3 = (trigger_name(z, scheme.name, contingency, line_id) for z in ("z1", "z2", "z3"))
            for name in (z1, z2, z3):
                m.add_binary(name)
            tag = f"{scheme.name},{contingency.name},{line_id}"
            m.add_constraint({**flow, z1: -big_m}, Sense.LE, rating, name=f"z1up[{tag}]")
            m.add_constraint({**flow, z1: -big_m}, Sense.GE, rating - big_m, name=f"z1lo[{tag}]")
            m.add_constraint({**reverse, z2: -big_m}, Sense.LE, rating, name=f"z2up[{tag}]")
            m.add_constraint({**reverse, z2: -big_m}, Sense.GE, rating - big_m, name=f"z2lo[{tag}]")
            m.add_constraint({z3: 1.0, z1: -1.0}, Sense.GE, 0.0, name=f"z3a[{tag}]")
            m.add_constraint({z3: 1.0, z2: -1.0}, Sense.GE, 0.0, name=f"z3b[{tag}]")
            m.add_constraint({z3: 1.0, z1: -1.0, z2: -1.0}, Sense.LE, 0.0, name=f"z3c[{tag}]")
            indicators[z3] = 1.0

        y = y_name(scheme.name, contingency)
        m.add_binary(y)
        tag = f"{scheme.name},{contingency.name}"
        m.add_constraint({**indicators, y: -1.0}, Sense.GE, 0.0, name=f"ylo[{tag}]")
        m.add_constraint({**indicators, y: -float(len(indicators))}, Sense.LE, 0.0, name=f"yup[{tag}]")

    def _add_post_ras_stage(
        self,
        m: MipModel,
        scheme: RasScheme,
        contingency: Contingency,
        intermediate: str,
        factors: Dict[int, float],
    ) -> None:
        key = stage_key(POST_RAS, contingency)
        out = contingency.outaged_lines
        big_m = self.cfg.big_m
        y = y_name(scheme.name, contingency)
        self._add_generation(m, key, switchable=True)
        self._add_angles(m, key, out)
        m.add_variable(dlt_name(key), -np.inf, np.inf)

        for gen in self.generators:
            zg, zgj = zg_name(key, gen.id), zgj_name(scheme.name, gen.id)
            pg, pg_i = pg_name(key, gen.id), pg_name(intermediate, gen.id)
            tag = f"{key},{gen.id}"
            m.add_binary(zg)
            # triggered: the unit follows the shared trip vector
            m.add_constraint({zg: 1.0, zgj: -1.0, y: 1.0}, Sense.LE, 1.0, name=f"tripa[{tag}]")
            m.add_constraint({zgj: 1.0, zg: -1.0, y: 1.0}, Sense.LE, 1.0, name=f"tripb[{tag}]")
            m.add_constraint({pg: 1.0, zg: -gen.p_max_mw / self.base}, Sense.LE, 0.0, name=f"pmax[{tag}]")
            m.add_constraint({pg: 1.0, zg: -gen.p_min_mw / self.base}, Sense.GE, 0.0, name=f"pmin[{tag}]")
            droop = {pg: 1.0, pg_i: -1.0, dlt_name(key): -factors[gen.id]}
            m.add_constraint({**droop, zg: big_m}, Sense.LE, big_m, name=f"droopup[{tag}]")
            m.add_constraint({**droop, zg: -big_m}, Sense.GE, -big_m, name=f"drooplo[{tag}]")

        count = len(self.generators)
        m.add_constraint(
            {**{zg_name(key, g.id): 1.0 for g in self.generators}, y: float(count)},
            Sense.GE,
            float(count),
            name=f"notrip[{key}]",
        )

        shed_cost = self.cfg.gamma * self.base
        for bus in self.net.buses:
            load = bus.base_load_mw / self.base
            name = pd_name(key, bus.id)
            m.add_variable(name, 0.0, load)
            if load > 0:
                m.add_constraint({name: 1.0, y: load}, Sense.GE, load, name=f"shed[{key},{bus.id}]")
                m.add_objective_linear(name, -shed_cost)
                m.add_objective_constant(shed_cost * load)

        self._add_balance(m, key, out, shed=True)
        self._add_line_limits(m, key, out)


def build_ras_scopf(net: Network, cfg: Optional[FormulationConfig] = None) -> MipModel:
    return RASSCOPF(net, cfg or FormulationConfig.case_study()).build()
