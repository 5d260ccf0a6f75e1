"""Experiment settings loaded from a YAML file.

The file has six optional sections::

    case:        path, prepare, rating_scale, radial_line, radial_scale
    formulation: gamma, rho, big_m, balancing, contingencies, schemes,
                 allow_balancing_trip, include_cost_constant
    solver:      backend, gap, node_limit, time_limit, segments, ...
    cascade:     max_steps, failure_fraction, overload_tol, balance_tol, backend
    scenarios:   distribution, low, high, count, seed, total_load_mw
    output:      directory, workers

Unknown sections or keys raise ``ConfigError``; missing ones keep their
defaults, which reproduce the RTS-96 case study.
"""

import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

from ras_scopf.cascade.simulator import CascadeOptions
from ras_scopf.core.case_reader import parse_case
from ras_scopf.core.errors import ConfigError
from ras_scopf.core.network import (
    CASE_STUDY_RADIAL_LINE,
    CASE_STUDY_RADIAL_SCALE,
    CASE_STUDY_RATING_SCALE,
    CASE_STUDY_BALANCING,
    Network,
    prepare_paper_case,
)
from ras_scopf.core.utils import parse_id_set
from ras_scopf.experiments.scenarios import DISTRIBUTIONS, ScenarioSpec
from ras_scopf.formulations.config import (
    DEFAULT_BIG_M,
    DEFAULT_GAMMA,
    DEFAULT_RHO,
    CASE_STUDY_MONITORED,
    CASE_STUDY_PROTECTED,
    FormulationConfig,
)
from ras_scopf.formulations.scheme import RasScheme, as_contingency
from ras_scopf.miqp.options import SolverOptions

logger = logging.getLogger(__name__)

DEFAULT_CASE_PATH = Path(__file__).resolve().parents[2] / "data" / "rts96.case"
DEFAULT_OUTPUT_DIR = Path("results")
SECTIONS = ("case", "formulation", "solver", "cascade", "scenarios", "output")


@dataclass
class CaseSettings:
    path: Path = DEFAULT_CASE_PATH
    prepare: bool = True
    rating_scale: float = CASE_STUDY_RATING_SCALE
    radial_line: int = CASE_STUDY_RADIAL_LINE
    radial_scale: float = CASE_STUDY_RADIAL_SCALE


@dataclass
class Settings:
    """Everything an experiment run needs.

    Attributes:
        case (CaseSettings): Where the case lives and how it is prepared.
        formulation (FormulationConfig): Penalties, schemes, balancing set.
        solver (SolverOptions): Backend for dispatch solves.
        cascade (CascadeOptions): Simulator settings.
        scenarios (ScenarioSpec): Load scenario distribution.
        output_dir (Path): Directory the reports are written to.
        workers (int): Thread pool size for cascades and scenarios.
    """

    case: CaseSettings = field(default_factory=CaseSettings)
    formulation: FormulationConfig = field(default_factory=FormulationConfig.case_study)
    solver: SolverOptions = field(default_factory=SolverOptions)
    cascade: CascadeOptions = field(default_factory=CascadeOptions)
    scenarios: ScenarioSpec = field(default_factory=lambda: ScenarioSpec.named("small"))
    output_dir: Path = DEFAULT_OUTPUT_DIR
    workers: int = 1

    def load_network(self) -> Network:
        """Parses the case and applies the case-study preparation unless already applied."""
        net = parse_case(self.case.path)
        if self.case.prepare and not net.prepared:
            net = self.prepare(net)
        return net

    def prepare(self, net: Network) -> Network:
        """Applies the configured rating changes and balancing set to an unprepared case."""
        return prepare_paper_case(
            net,
            rating_scale=self.case.rating_scale,
            radial_line=self.case.radial_line,
            radial_scale=self.case.radial_scale,
            balancing=self.formulation.balancing or CASE_STUDY_BALANCING,
        )


def _section(raw: Dict[str, Any], name: str, allowed) -> Dict[str, Any]:
    values = raw.get(name) or {}
    if not isinstance(values, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    unknown = set(values) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys in section {name!r}: {sorted(unknown)}")
    return values


def _scheme(raw: Dict[str, Any], position: int) -> RasScheme:
    unknown = set(raw) - {"name", "monitored_lines", "protected", "trip_set"}
    if unknown:
        raise ConfigError(f"unknown keys in scheme {position}: {sorted(unknown)}")
    try:
        return RasScheme(
            monitored_lines=parse_id_set(raw["monitored_lines"]),
            protected=frozenset(as_contingency(c) for c in raw["protected"]),
            trip_set=parse_id_set(raw.get("trip_set")),
            name=str(raw.get("name", f"ras{position + 1}")),
        )
    except KeyError as exc:
        raise ConfigError(f"scheme {position} is missing {exc.args[0]!r}") from None


def _formulation(values: Dict[str, Any]) -> FormulationConfig:
    schemes_raw = values.get("schemes")
    if schemes_raw is None:
        schemes = (RasScheme(frozenset(CASE_STUDY_MONITORED), frozenset(CASE_STUDY_PROTECTED)),)
    else:
        schemes = tuple(_scheme(s, i) for i, s in enumerate(schemes_raw))
    contingencies = values.get("contingencies")
    balancing = values.get("balancing", "1-16")
    return FormulationConfig(
        gamma=float(values.get("gamma", DEFAULT_GAMMA)),
        rho=float(values.get("rho", DEFAULT_RHO)),
        big_m=float(values.get("big_m", DEFAULT_BIG_M)),
        contingencies=None if contingencies is None else tuple(as_contingency(c) for c in contingencies),
        schemes=schemes,
        balancing=None if balancing is None else parse_id_set(balancing),
        allow_balancing_trip=bool(values.get("allow_balancing_trip", True)),
        include_cost_constant=bool(values.get("include_cost_constant", True)),
    )


def _scenarios(values: Dict[str, Any]) -> ScenarioSpec:
    distribution = values.get("distribution", "small")
    extra = {k: values[k] for k in ("count", "seed", "total_load_mw") if k in values}
    if "low" in values or "high" in values:
        low, high = DISTRIBUTIONS.get(distribution, DISTRIBUTIONS["small"])
        return ScenarioSpec(
            low=float(values.get("low", low)),
            high=float(values.get("high", high)),
            name="custom",
            **extra,
        )
    return ScenarioSpec.named(distribution, **extra)


def settings_from_dict(raw: Optional[Dict[str, Any]]) -> Settings:
    """
    Builds Settings from an already parsed mapping.

    Raises:
        ConfigError: On unknown sections or keys and on invalid values.
    """
    raw = raw or {}
    if not isinstance(raw, dict):
        raise ConfigError("configuration root must be a mapping")
    unknown = set(raw) - set(SECTIONS)
    if unknown:
        raise ConfigError(f"unknown configuration sections: {sorted(unknown)}")

    case_values = _section(raw, "case", [f.name for f in fields(CaseSettings)])
    case = CaseSettings(**case_values)
    case.path = Path(case.path)

    formulation = _formulation(
        _section(
            raw,
            "formulation",
            [
                "gamma",
                "rho",
                "big_m",
                "balancing",
                "contingencies",
                "schemes",
                "allow_balancing_trip",
                "include_cost_constant",
            ],
        )
    )
    solver = SolverOptions(**_section(raw, "solver", [f.name for f in fields(SolverOptions)]))

    cascade_values = dict(
        _section(raw, "cascade", ["max_steps", "failure_fraction", "overload_tol", "balance_tol", "backend"])
    )
    backend = cascade_values.pop("backend", "highs")
    cascade = CascadeOptions(solver=SolverOptions(backend=backend), **cascade_values)

    scenarios = _scenarios(
        _section(raw, "scenarios", ["distribution", "low", "high", "count", "seed", "total_load_mw"])
    )
    output = _section(raw, "output", ["directory", "workers"])
    workers = int(output.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    return Settings(
        case=case,
        formulation=formulation,
        solver=solver,
        cascade=cascade,
        scenarios=scenarios,
        output_dir=Path(output.get("directory", DEFAULT_OUTPUT_DIR)),
        workers=workers,
    )


def load_settings(path=None) -> Settings:
    """
    Loads experiment settings from a YAML file.

    Args:
        path (str or Path, optional): The file; ``None`` gives the defaults.
            A relative ``case.path`` is resolved against the file's directory.

    Returns:
        Settings: The validated settings.

    Raises:
        ConfigError: If the file is not valid YAML or holds invalid settings.
        OSError: If the file cannot be read.
    """
    if path is None:
        return settings_from_dict({})
    path = Path(path)
    with open(path, encoding="utf-8") as handle:
        try:
            raw = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{path}: invalid YAML: {exc}") from None
    settings = settings_from_dict(raw)
    if not settings.case.path.is_absolute():
        settings.case.path = (path.parent / settings.case.path).resolve()
    logger.info("Loaded settings from %s", path)
    return settings
