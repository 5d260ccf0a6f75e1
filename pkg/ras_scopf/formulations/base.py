"""Constraint blocks shared by every formulation.

All quantities are per unit on the network base; line flows are linear
expressions ``(th_from - th_to) / x`` and never separate variables.
"""

import logging
from typing import Dict, Iterable, List, Optional

import numpy as np

from ras_scopf.core.dcpf import reference_bus
from ras_scopf.core.network import Contingency, Generator, Line, Network, find_islands
from ras_scopf.formulations.config import FormulationConfig
from ras_scopf.formulations.solution import DispatchSolution, extract_solution
from ras_scopf.formulations.variables import (
    INTERMEDIATE,
    PRE,
    dlt_name,
    pd_name,
    pg_name,
    stage_key,
    th_name,
)
from ras_scopf.miqp.model import MipModel, Sense
from ras_scopf.miqp.options import SolverOptions
from ras_scopf.miqp.solve import solve_model

logger = logging.getLogger(__name__)


class Formulation:
    """
    Base class of the four dispatch formulations.

    A formulation is constructed around a shared, read-only Network and a
    FormulationConfig; ``build`` returns a fresh MipModel and ``solve`` runs
    the configured backend and extracts a typed DispatchSolution.
    """

    name = "formulation"

    def __init__(self, net: Network, cfg: Optional[FormulationConfig] = None):
        self.net = net
        self.cfg = cfg or FormulationConfig()
        self.generators: List[Generator] = net.active_generators()
        self.base = net.base_mva

    # subclasses fill the model

    def build(self) -> MipModel:
        raise NotImplementedError

    def solve(self, options: Optional[SolverOptions] = None) -> DispatchSolution:
        """
        Builds and solves the model.

        Args:
            options (SolverOptions, optional): Backend, gap and limits.

        Returns:
            DispatchSolution: Stage states when optimal, otherwise only the
                solver status.
        """
        model = self.build()
        solution = solve_model(model, options)
        if not solution.is_optimal:
            logger.warning("%s on %s ended with status %s", self.name, self.net.name, solution.status.value)
            return DispatchSolution(formulation=self.name, status=solution.status)
        return extract_solution(model, solution, self.net, self.cfg, formulation=self.name)

    # shared blocks

    def _flow_terms(self, line: Line, key: str, scale: float = 1.0) -> Dict[str, float]:
        inv_x = scale / line.reactance_pu
        return {th_name(key, line.from_bus): inv_x, th_name(key, line.to_bus): -inv_x}

    def _add_angles(self, m: MipModel, key: str, out: Iterable[int]) -> None:
        """Free angles with one zero reference per island of the stage topology."""
        references = {reference_bus(self.net, island) for island in find_islands(self.net, out)}
        for bus in self.net.buses:
            if bus.id in references:
                m.add_variable(th_name(key, bus.id), 0.0, 0.0)
            else:
                m.add_variable(th_name(key, bus.id), -np.inf, np.inf)

    def _add_generation(self, m: MipModel, key: str, switchable: bool = False) -> None:
        """Output variables; switchable units may go to zero when their status binary is 0."""
        for gen in self.generators:
            lower = 0.0 if switchable else gen.p_min_mw / self.base
            m.add_variable(pg_name(key, gen.id), lower, gen.p_max_mw / self.base)

    def _add_balance(self, m: MipModel, key: str, out: Iterable[int], shed: bool = False) -> None:
        """Nodal balance: generation minus flows leaving the bus equals the load served."""
        out = set(out)
        lines = self.net.active_lines(out)
        for bus in self.net.buses:
            coeffs: Dict[str, float] = {}
            for gen in self.generators:
                if gen.bus == bus.id:
                    coeffs[pg_name(key, gen.id)] = 1.0
            for line in lines:
                if line.from_bus == bus.id:
                    for name, value in self._flow_terms(line, key, -1.0).items():
                        coeffs[name] = coeffs.get(name, 0.0) + value
                elif line.to_bus == bus.id:
                    for name, value in self._flow_terms(line, key).items():
                        coeffs[name] = coeffs.get(name, 0.0) + value
            if shed:
                coeffs[pd_name(key, bus.id)] = -1.0
                rhs = 0.0
            else:
                rhs = bus.base_load_mw / self.base
            m.add_constraint(coeffs, Sense.EQ, rhs, name=f"bal[{key},{bus.id}]")

    def _add_line_limits(self, m: MipModel, key: str, out: Iterable[int]) -> None:
        for line in self.net.active_lines(out):
            rating = line.rating_mw / self.base
            flow = self._flow_terms(line, key)
            m.add_constraint(flow, Sense.LE, rating, name=f"fmax[{key},{line.id}]")
            m.add_constraint(flow, Sense.GE, -rating, name=f"fmin[{key},{line.id}]")

    def _add_cost(self, m: MipModel) -> None:
        """Quadratic generation cost of the pre-contingency dispatch, in $."""
        for gen in self.generators:
            name = pg_name(PRE, gen.id)
            if gen.cost_quad:
                m.add_objective_quadratic(name, name, gen.cost_quad * self.base**2)
            if gen.cost_lin:
                m.add_objective_linear(name, gen.cost_lin * self.base)
            if self.cfg.include_cost_constant:
                m.add_objective_constant(gen.cost_const)

    def _add_pre_stage(self, m: MipModel) -> None:
        self._add_generation(m, PRE)
        self._add_angles(m, PRE, ())
        self._add_balance(m, PRE, ())
        self._add_line_limits(m, PRE, ())
        self._add_cost(m)

    def _add_intermediate_stage(
        self,
        m: MipModel,
        contingency: Contingency,
        factors: Dict[int, float],
        enforce_limits: bool,
    ) -> str:
        """
        Post-contingency state before any RAS action.

        Every unit follows ``pg_i = pg_o + K * dlt``; for line outages the load
        is unchanged, so the free signal ``dlt`` settles the balance.
        """
        key = stage_key(INTERMEDIATE, contingency)
        out = contingency.outaged_lines
        self._add_generation(m, key)
        self._add_angles(m, key, out)
        m.add_variable(dlt_name(key), -np.inf, np.inf)
        for gen in self.generators:
            m.add_constraint(
                {pg_name(key, gen.id): 1.0, pg_name(PRE, gen.id): -1.0, dlt_name(key): -factors[gen.id]},
                Sense.EQ,
                0.0,
                name=f"droop[{key},{gen.id}]",
            )
        self._add_balance(m, key, out)
        if enforce_limits:
            self._add_line_limits(m, key, out)
        return key
