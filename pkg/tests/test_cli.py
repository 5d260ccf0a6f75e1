import pandas as pd
import pytest

from ras_scopf.core.case_reader import parse_case, write_case
from ras_scopf.experiments.cli import (
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
    EXIT_USAGE,
    build_parser,
    main,
)
from tests.conftest import RTS96_CASE

PARALLEL_CONFIG = """\
case:
  path: parallel.case
  prepare: false
formulation:
  rho: 10
  balancing: null
  schemes:
    - name: ras1
      monitored_lines: [1, 2]
      protected: [1, 2]
solver:
  backend: branch_and_bound
output:
  directory: out
"""


@pytest.fixture
def parallel_config(tmp_path, parallel_net, monkeypatch):
    # output.directory is relative to the working directory
    monkeypatch.chdir(tmp_path)
    write_case(parallel_net, tmp_path / "parallel.case")
    path = tmp_path / "parallel.yaml"
    path.write_text(PARALLEL_CONFIG)
    return path


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["bogus"]) == EXIT_USAGE
    assert main(["cascade"]) == EXIT_USAGE
    assert main(["--help"]) == EXIT_OK
    assert "prepare-case" in capsys.readouterr().out


def test_parser_defaults():
    args = build_parser().parse_args(["solve"])
    assert args.formulation == "ras-scopf"
    assert args.config is None


def test_invalid_config(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("plots: {}\n")
    assert main(["compare", "--config", str(path)]) == EXIT_INVALID
    assert "unknown configuration sections" in capsys.readouterr().err


def test_invalid_worker_count():
    assert main(["prepare-case", "--out", "x.case", "--workers", "0"]) == EXIT_INVALID


def test_missing_case_file(tmp_path):
    missing = tmp_path / "missing.case"
    assert main(["prepare-case", "--case", str(missing), "--out", str(tmp_path / "out.case")]) == EXIT_IO


def test_prepare_case(tmp_path, capsys):
    out = tmp_path / "prepared.case"
    assert main(["prepare-case", "--case", str(RTS96_CASE), "--out", str(out)]) == EXIT_OK
    assert str(out) in capsys.readouterr().out
    net = parse_case(out)
    assert net.prepared
    assert net.line(11).rating_mw == pytest.approx(1.5 * parse_case(RTS96_CASE).line(11).rating_mw)
    # preparing twice is refused
    assert main(["prepare-case", "--case", str(out), "--out", str(tmp_path / "again.case")]) == EXIT_INVALID


def test_solve(parallel_config, tmp_path, capsys):
    assert main(["solve", "--config", str(parallel_config), "--formulation", "ras-scopf"]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "ras-scopf: cost 1100.0" in printed
    assert "trip [1]" in printed
    dispatch = pd.read_csv(tmp_path / "out" / "dispatch_ras-scopf.csv")
    assert list(dispatch["generator"]) == [1, 2]
    assert dispatch["p_mw"].iloc[0] == pytest.approx(100.0, abs=1e-3)


def test_solve_ras_aware_with_given_trip(parallel_config, tmp_path):
    args = ["solve", "--config", str(parallel_config), "--formulation", "ras-aware-scopf", "--trip", "1"]
    assert main(args) == EXIT_OK
    assert (tmp_path / "out" / "dispatch_ras-aware-scopf.csv").exists()


def test_cascade(parallel_config, tmp_path, capsys):
    assert main(["cascade", "--config", str(parallel_config), "--outage", "1"]) == EXIT_OK
    assert "outage 1: system-failure" in capsys.readouterr().out
    trace = pd.read_csv(tmp_path / "out" / "trace_opf_1.csv")
    assert trace["kind"].iloc[0] == "initiating-outage"
    assert trace["kind"].iloc[-1] == "system-failure"

    args = ["cascade", "--config", str(parallel_config), "--outage", "1", "--dispatch", "ras-scopf"]
    assert main(args) == EXIT_OK
    assert "outage 1: quiescent" in capsys.readouterr().out


def test_unknown_outage_line(parallel_config):
    assert main(["cascade", "--config", str(parallel_config), "--outage", "9"]) == EXIT_INVALID


def test_export_mps(parallel_config, tmp_path):
    out = tmp_path / "models" / "opf.mps"
    args = ["export-mps", "--config", str(parallel_config), "--formulation", "opf", "--out", str(out)]
    assert main(args) == EXIT_OK
    text = out.read_text()
    assert text.startswith("NAME opf_parallel")
    assert "QUADOBJ" in text


def test_compare_writes_reports(parallel_config, tmp_path):
    assert main(["compare", "--config", str(parallel_config), "--backend", "highs"]) == EXIT_OK
    table = pd.read_csv(tmp_path / "out" / "table2.csv")
    assert list(table["formulation"]) == ["opf", "ras-scopf", "scopf"]
    assert (tmp_path / "out" / "cascades.csv").exists()
