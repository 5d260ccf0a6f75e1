"""Randomized load scenarios for the load-sensitivity study."""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from ras_scopf.core.errors import ConfigError
from ras_scopf.core.network import Network

logger = logging.getLogger(__name__)

DISTRIBUTIONS = {
    "small": (0.9, 1.1),  # X ~ U(0.9, 1.1)
    "large": (0.5, 1.5),  # X ~ U(0.5, 1.5)
}
DEFAULT_SCENARIO_COUNT = 100
DEFAULT_TOTAL_LOAD_MW = 2850.0  # RTS-96 single area


@dataclass(frozen=True)
class ScenarioSpec:
    """How load scenarios are drawn.

    Attributes:
        low (float): Lower bound of the uniform scaling factor.
        high (float): Upper bound of the uniform scaling factor.
        count (int): Number of scenarios; 0 gives an empty study.
        seed (int): Seed of the random generator.
        total_load_mw (float, optional): System load every scenario is
            rescaled to; ``None`` keeps the network's total.
        name (str): Label used in reports, ``small``, ``large`` or ``custom``.
    """

    low: float = DISTRIBUTIONS["small"][0]
    high: float = DISTRIBUTIONS["small"][1]
    count: int = DEFAULT_SCENARIO_COUNT
    seed: int = 0
    total_load_mw: Optional[float] = DEFAULT_TOTAL_LOAD_MW
    name: str = "custom"

    def __post_init__(self):
        if not 0 < self.low < self.high:
            raise ConfigError(f"scenario bounds must satisfy 0 < low < high, got ({self.low}, {self.high})")
        if self.count < 0:
            raise ConfigError("scenario count must be >= 0")
        if self.total_load_mw is not None and self.total_load_mw <= 0:
            raise ConfigError("total_load_mw must be > 0")

    @classmethod
    def named(cls, distribution: str, **overrides) -> "ScenarioSpec":
        """Builds a spec for the ``small`` or ``large`` distribution."""
        try:
            low, high = DISTRIBUTIONS[distribution]
        except KeyError:
            raise ConfigError(
                f"unknown distribution {distribution!r}; expected one of {sorted(DISTRIBUTIONS)}"
            ) from None
        return cls(low=low, high=high, name=distribution, **overrides)


def generate_scenarios(net: Network, spec: ScenarioSpec) -> List[Dict[int, float]]:
    """
    Draws per-bus load vectors.

    Every bus load is scaled by its own uniform factor, then the whole vector
    is rescaled so the system load stays at ``spec.total_load_mw``. Buses
    without load stay at zero.

    Args:
        net (Network): Network supplying the base loads.
        spec (ScenarioSpec): Distribution, count and seed.

    Returns:
        list: One bus id -> MW mapping per scenario, in draw order.

    Raises:
        ConfigError: If the network carries no load to scale.
    """
    bus_ids = net.bus_ids
    base = np.array([net.loads[b] for b in bus_ids], dtype=float)
    if base.sum() <= 0:
        raise ConfigError("network has no load to scale")
    total = base.sum() if spec.total_load_mw is None else spec.total_load_mw
    if spec.total_load_mw is not None and abs(base.sum() - spec.total_load_mw) > 1e-6:
        logger.warning(
            "Base load %.1f MW differs from the scenario total %.1f MW", base.sum(), spec.total_load_mw
        )

    rng = np.random.default_rng(spec.seed)
    scenarios = []
    for _ in range(spec.count):
        scaled = rng.uniform(spec.low, spec.high, size=len(bus_ids)) * base
        loads = scaled * (total / scaled.sum())
        scenarios.append({bus_id: float(p) for bus_id, p in zip(bus_ids, loads)})
    logger.info(
        "Drew %d %s scenarios from U(%.2f, %.2f) with seed %d", spec.count, spec.name, spec.low, spec.high, spec.seed
    )
    return scenarios
