import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List

import pandas as pd

from ras_scopf.cascade.state import CascadeResult
from ras_scopf.formulations.solution import DispatchSolution

logger = logging.getLogger(__name__)

SHED_TOL_MW = 1e-3  # Cascades shedding less than this count as shedding nothing
LINE7_OUTAGE = "7"

CRITICAL_COLUMNS = ["outage", "overloaded_line", "loading_pct"]
COST_COLUMNS = ["formulation", "status", "cost", "increase_pct", "error"]
CASCADE_COLUMNS = [
    "scenario",
    "formulation",
    "contingency",
    "status",
    "failed",
    "failure_mode",
    "triggered",
    "lines_tripped",
    "shed_mw",
    "line7",
]
SCENARIO_COLUMNS = ["scenario", "feasible", "status", "cost", "error"]
TABLE2_COLUMNS = [
    "formulation",
    "cost",
    "increase_pct",
    "contingencies_with_shed",
    "failures",
    "total_shed_mw",
]
SENSITIVITY_COLUMNS = SCENARIO_COLUMNS + ["cascades", "failures", "shed_mw"]


def rows_frame(rows, columns) -> pd.DataFrame:
    return pd.DataFrame(list(rows), columns=columns)


def cascade_row(result: CascadeResult, formulation: str, monitored_lines, scenario: int = -1) -> dict:
    """Flattens one cascade outcome into a report row."""
    return {
        "scenario": scenario,
        "formulation": formulation,
        "contingency": result.contingency.name,
        "status": result.status.value,
        "failed": result.failed,
        "failure_mode": result.failure_mode(monitored_lines),
        "triggered": bool(result.triggered_schemes),
        "lines_tripped": "+".join(str(l) for l in result.tripped_lines),
        "shed_mw": result.total_load_shed_mw,
        "line7": result.contingency.name == LINE7_OUTAGE,
    }


@dataclass
class ExperimentReport:
    """
    Rows produced by one experiment.

    Only row data is stored; every aggregate (counts, totals, Table II) is
    recomputed from the rows when asked for.

    Attributes:
        name (str): Experiment label (``compare``, ``sensitivity-small``...).
        critical (pd.DataFrame): Critical contingency rows.
        costs (pd.DataFrame): One row per formulation solved.
        cascades (pd.DataFrame): One row per cascade run.
        scenarios (pd.DataFrame): One row per load scenario.
        traces (dict): Run label -> CascadeResult, for trace export.
        dispatches (dict): Formulation name -> DispatchSolution.
    """

    name: str
    critical: pd.DataFrame = None
    costs: pd.DataFrame = None
    cascades: pd.DataFrame = None
    scenarios: pd.DataFrame = None
    traces: Dict[str, CascadeResult] = field(default_factory=dict)
    dispatches: Dict[str, DispatchSolution] = field(default_factory=dict)

    def __post_init__(self):
        for attr, columns in (
            ("critical", CRITICAL_COLUMNS),
            ("costs", COST_COLUMNS),
            ("cascades", CASCADE_COLUMNS),
            ("scenarios", SCENARIO_COLUMNS),
        ):
            if getattr(self, attr) is None:
                setattr(self, attr, rows_frame([], columns))

    @property
    def scenario_count(self) -> int:
        return len(self.scenarios)

    @property
    def feasible_count(self) -> int:
        return int(self.scenarios["feasible"].astype(bool).sum())

    @property
    def failing_scenarios(self) -> int:
        failed = self.cascades[self.cascades["failed"].astype(bool)]
        return int(failed["scenario"].nunique())

    @property
    def failure_count(self) -> int:
        return int(self.cascades["failed"].astype(bool).sum())

    @property
    def total_shed_mw(self) -> float:
        return float(self.cascades["shed_mw"].sum())

    def summary(self) -> dict:
        return {
            "name": self.name,
            "scenarios": self.scenario_count,
            "feasible": self.feasible_count,
            "failing_scenarios": self.failing_scenarios,
            "cascades": len(self.cascades),
            "failures": self.failure_count,
            "total_shed_mw": self.total_shed_mw,
        }

    def table2(self) -> pd.DataFrame:
        """Costs next to the cascade outcomes of each formulation's dispatch."""
        rows = []
        for cost in self.costs.itertuples(index=False):
            runs = self.cascades[self.cascades["formulation"] == cost.formulation]
            rows.append(
                {
                    "formulation": cost.formulation,
                    "cost": cost.cost,
                    "increase_pct": cost.increase_pct,
                    "contingencies_with_shed": int((runs["shed_mw"] > SHED_TOL_MW).sum()),
                    "failures": int(runs["failed"].astype(bool).sum()),
                    "total_shed_mw": float(runs["shed_mw"].sum()),
                }
            )
        return rows_frame(rows, TABLE2_COLUMNS)

    def sensitivity(self) -> pd.DataFrame:
        """Scenario rows with their cascade counts and shed; discarded scenarios carry zeros."""
        grouped = self.cascades.groupby("scenario").agg(
            cascades=("contingency", "size"),
            failures=("failed", "sum"),
            shed_mw=("shed_mw", "sum"),
        )
        merged = self.scenarios.merge(grouped, how="left", left_on="scenario", right_index=True)
        merged[["cascades", "failures"]] = merged[["cascades", "failures"]].fillna(0).astype(int)
        merged["shed_mw"] = merged["shed_mw"].fillna(0.0).astype(float)
        return merged[SENSITIVITY_COLUMNS].sort_values("scenario").reset_index(drop=True)

    def write(self, directory) -> List[Path]:
        """
        Writes every non-empty table of the report as CSV.

        Files: ``table1.csv`` (critical contingencies), ``table2.csv`` and
        ``cascades.csv`` (formulation comparison), ``sensitivity.csv`` and
        ``sensitivity_cascades.csv`` (scenario study), one
        ``trace_<run>.csv`` per stored trace.

        Returns:
            list: The paths written.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []

        def save(frame: pd.DataFrame, filename: str):
            path = directory / filename
            frame.to_csv(path, index=False)
            written.append(path)

        if not self.critical.empty or self.name == "critical":
            save(self.critical, "table1.csv")
        if not self.costs.empty:
            save(self.table2(), "table2.csv")
            save(self.cascades, "cascades.csv")
        elif not self.scenarios.empty or self.name.startswith("sensitivity"):
            save(self.sensitivity(), "sensitivity.csv")
            save(self.cascades, "sensitivity_cascades.csv")
        for label, trace in self.traces.items():
            path = directory / f"trace_{label}.csv"
            trace.to_csv(path)
            written.append(path)
        logger.info("Wrote %d report files to %s", len(written), directory)
        return written
