from dataclasses import dataclass, replace
from typing import FrozenSet, Iterable

from ras_scopf.core.errors import ConfigError
from ras_scopf.core.network import Contingency, Network


def as_contingency(value) -> Contingency:
    if isinstance(value, Contingency):
        return value
    if isinstance(value, int):
        return Contingency.line(value)
    if isinstance(value, str):
        return Contingency(frozenset(int(l) for l in value.split("+")))
    return Contingency(frozenset(int(l) for l in value))


@dataclass(frozen=True)
class RasScheme:
    """A remedial action scheme.

    The scheme watches ``monitored_lines``; when any of them is overloaded
    after one of the ``protected`` contingencies it trips every generator in
    ``trip_set``. ``trip_set`` is empty until a RAS-SCOPF solve designs it.

    Attributes:
        monitored_lines (frozenset): Line ids watched by the scheme.
        protected (frozenset): Contingencies the scheme is designed for.
        trip_set (frozenset): Generator ids tripped on activation.
        name (str): Label used in variable names, traces and reports.
        triggered (bool): Runtime flag; simulator runs track it per scheme
            name in their own state.
    """

    monitored_lines: FrozenSet[int]
    protected: FrozenSet[Contingency]
    trip_set: FrozenSet[int] = frozenset()
    name: str = "ras1"
    triggered: bool = False

    def __post_init__(self):
        object.__setattr__(self, "monitored_lines", frozenset(int(l) for l in self.monitored_lines))
        object.__setattr__(self, "protected", frozenset(as_contingency(c) for c in self.protected))
        object.__setattr__(self, "trip_set", frozenset(int(g) for g in self.trip_set))
        if not self.monitored_lines:
            raise ConfigError(f"scheme {self.name!r}: monitored_lines must be non-empty")
        if not self.protected:
            raise ConfigError(f"scheme {self.name!r}: protected contingencies must be non-empty")
        if not self.name or any(ch.isspace() or ch in "[]," for ch in self.name):
            raise ConfigError(f"scheme name {self.name!r} must be a plain token")

    def monitors(self, line_id: int) -> bool:
        return line_id in self.monitored_lines

    def protects(self, contingency: Contingency) -> bool:
        return contingency in self.protected

    def with_trip_set(self, trip_set: Iterable[int]) -> "RasScheme":
        return replace(self, trip_set=frozenset(trip_set))

    def trip_capacity_mw(self, net: Network) -> float:
        return float(sum(net.generator(g).p_max_mw for g in self.trip_set))

    def validate(self, net: Network) -> "RasScheme":
        """Checks that every referenced line and generator exists in ``net``."""
        for line_id in self.monitored_lines:
            net.line(line_id)
        for contingency in self.protected:
            for line_id in contingency.outaged_lines:
                net.line(line_id)
        for gen_id in self.trip_set:
            net.generator(gen_id)
        return self

    def __str__(self):
        return (
            f"{self.name}: monitor {sorted(self.monitored_lines)}, "
            f"protect {sorted(c.name for c in self.protected)}, trip {sorted(self.trip_set)}"
        )
