import logging
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from ras_scopf.core.errors import ConfigError
from ras_scopf.core.network import (
    CASE_STUDY_BALANCING,
    Contingency,
    Network,
    non_radial_contingencies,
    participation_factors,
)
from ras_scopf.formulations.scheme import RasScheme, as_contingency

logger = logging.getLogger(__name__)

DEFAULT_GAMMA = 5000.0  # $/MW of post-RAS load shed
DEFAULT_RHO = 1000.0  # $ per generator in the RAS trip set
DEFAULT_BIG_M = 100.0  # p.u.; the lower constant m is -DEFAULT_BIG_M
CASE_STUDY_MONITORED = (23,)
CASE_STUDY_PROTECTED = (7, 18, 21, 22, 27, 29)


@dataclass
class FormulationConfig:
    """Parameters shared by every formulation builder.

    Attributes:
        gamma (float): Load-shed penalty in $/MW.
        rho (float): Penalty in $ per generator in a trip set.
        big_m (float): Big-M constant in p.u.; the lower constant is ``-big_m``.
        contingencies (tuple, optional): The contingency set. ``None`` means
            every single non-radial line outage of the network.
        schemes (tuple): RAS schemes; their protected sets form C_M.
        balancing (frozenset, optional): Generators carrying the droop. When
            ``None`` the factors stored on the network are used.
        allow_balancing_trip (bool): Whether a trip set may contain
            generators with a positive participation factor.
        include_cost_constant (bool): Add each generator's constant cost term
            to the objective.
    """

    gamma: float = DEFAULT_GAMMA
    rho: float = DEFAULT_RHO
    big_m: float = DEFAULT_BIG_M
    contingencies: Optional[Tuple[Contingency, ...]] = None
    schemes: Tuple[RasScheme, ...] = ()
    balancing: Optional[FrozenSet[int]] = None
    allow_balancing_trip: bool = True
    include_cost_constant: bool = True

    def __post_init__(self):
        if self.gamma <= 0:
            raise ConfigError("gamma must be > 0")
        if self.rho < 0:
            raise ConfigError("rho must be >= 0")
        if self.big_m <= 0:
            raise ConfigError("big_m must be > 0")
        if self.contingencies is not None:
            self.contingencies = tuple(
                sorted({as_contingency(c) for c in self.contingencies}, key=lambda c: c.sort_key)
            )
        self.schemes = tuple(self.schemes)
        names = [s.name for s in self.schemes]
        if len(set(names)) != len(names):
            raise ConfigError(f"scheme names must be unique, got {names}")
        seen = set()
        for scheme in self.schemes:
            overlap = seen & scheme.protected
            if overlap:
                raise ConfigError(
                    f"contingencies {sorted(c.name for c in overlap)} are protected by more than one scheme"
                )
            seen |= scheme.protected
        if self.contingencies is not None:
            missing = self.protected - set(self.contingencies)
            if missing:
                raise ConfigError(
                    f"protected contingencies {sorted(c.name for c in missing)} are not in the contingency set"
                )
        if self.balancing is not None:
            self.balancing = frozenset(self.balancing)
            if not self.balancing:
                raise ConfigError("balancing set must be non-empty")

    @classmethod
    def case_study(cls, **overrides) -> "FormulationConfig":
        """The case-study settings: one scheme on line 23 protecting six outages."""
        values = dict(
            schemes=(RasScheme(frozenset(CASE_STUDY_MONITORED), frozenset(CASE_STUDY_PROTECTED)),),
            balancing=frozenset(CASE_STUDY_BALANCING),
        )
        values.update(overrides)
        return cls(**values)

    @property
    def protected(self) -> FrozenSet[Contingency]:
        return frozenset(c for s in self.schemes for c in s.protected)

    @property
    def monitored_lines(self) -> FrozenSet[int]:
        return frozenset(l for s in self.schemes for l in s.monitored_lines)

    def scheme_for(self, contingency: Contingency) -> Optional[RasScheme]:
        for scheme in self.schemes:
            if scheme.protects(contingency):
                return scheme
        return None

    def contingency_set(self, net: Network) -> List[Contingency]:
        """
        Resolves the contingency set against a network.

        Returns:
            list: Contingencies sorted by outaged line ids.

        Raises:
            ConfigError: If a protected contingency is outside the set or an
                outaged line does not exist.
        """
        if self.contingencies is None:
            resolved = non_radial_contingencies(net)
        else:
            resolved = list(self.contingencies)
        for contingency in resolved:
            for line_id in contingency.outaged_lines:
                if not net.has_line(line_id):
                    raise ConfigError(f"contingency {contingency} references unknown line {line_id}")
        missing = self.protected - set(resolved)
        if missing:
            raise ConfigError(
                f"protected contingencies {sorted(c.name for c in missing)} are not in the contingency set"
            )
        return sorted(resolved, key=lambda c: c.sort_key)

    def participation(self, net: Network) -> Dict[int, float]:
        """
        Participation factors per generator id.

        Raises:
            ConfigError: If neither ``balancing`` nor the network provides factors.
        """
        if self.balancing is not None:
            return participation_factors(net, self.balancing)
        factors = net.participation()
        if sum(factors.values()) <= 0:
            raise ConfigError(
                "network carries no participation factors; prepare the case or set a balancing set"
            )
        return factors

    def with_schemes(self, schemes: Iterable[RasScheme]) -> "FormulationConfig":
        return replace(self, schemes=tuple(schemes))
