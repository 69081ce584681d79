from __future__ import annotations

import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from launcher import main


def read_csv(path: str | Path) -> list[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fp:
        return list(csv.DictReader(fp))


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def test_version(runner):
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert "jeansbench" in result.output


def test_modes_table(runner):
    with runner.isolated_filesystem():
        result = runner.invoke(main, ["modes", "--out", "res"])
        assert result.exit_code == 0, result.output
        rows = read_csv("res/modes.csv")

    assert [row["classification"] for row in rows] == ["Growing", "Growing", "Oscillatory"]
    assert list(rows[0]) == [
        "lam",
        "lam_kappa",
        "classification",
        "mu_plus",
        "mu_minus",
        "amp_t1",
        "amp_t10",
        "amp_t100",
        "closed_form_error",
    ]
    assert float(rows[0]["mu_plus"]) == pytest.approx(2 / 3)
    assert float(rows[0]["amp_t100"]) == pytest.approx(100 ** (2 / 3), rel=1e-6)
    assert float(rows[1]["closed_form_error"]) <= 1e-8
    assert rows[2]["mu_plus"] == "nan"


def test_modes_with_explicit_eigenvalues(runner):
    with runner.isolated_filesystem():
        result = runner.invoke(
            main, ["modes", "--lam=-0.5", "--times", "2", "--out", "res", "--big-g", "2"]
        )
        assert result.exit_code == 0, result.output
        rows = read_csv("res/modes.csv")
    assert len(rows) == 1 and float(rows[0]["lam"]) == -0.5
    assert "amp_t2" in rows[0]


def test_modes_with_empty_list_writes_header_only(runner):
    with runner.isolated_filesystem():
        Path("config.json").write_text(json.dumps({"args": {"lams": []}}), encoding="utf-8")
        result = runner.invoke(main, ["modes", "--config", "config.json", "--out", "res"])
        assert result.exit_code == 0, result.output
        lines = Path("res/modes.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1 and lines[0].startswith("lam,lam_kappa,classification")


@pytest.mark.parametrize(
    "args",
    [
        ["modes", "--gamma", "1"],
        ["modes", "--gamma", "1.6666666666666667"],
        ["simulate", "--grid-n", "12"],
        ["simulate", "--config", "missing.json"],
        ["sweep"],
    ],
)
def test_usage_errors_exit_with_two(runner, args):
    with runner.isolated_filesystem():
        result = runner.invoke(main, [*args, "--out", "res"])
    assert result.exit_code == 2


def test_simulate_is_deterministic(runner):
    args = ["simulate", "--grid-n", "8", "--tau-min", "0.5", "--snapshots", "2", "--out", "res"]
    with runner.isolated_filesystem():
        assert runner.invoke(main, args).exit_code == 0
        first = Path("res/record.json").read_bytes(), Path("res/snapshots.csv").read_bytes()
        assert runner.invoke(main, args).exit_code == 0
        second = Path("res/record.json").read_bytes(), Path("res/snapshots.csv").read_bytes()

    assert first == second
    record = json.loads(first[0])
    assert record["config"]["grid"]["n"] == 8
    assert record["bounds"]["holds"]
    assert record["energy"]["nonincreasing"]
    assert [row["t"] for row in record["snapshots"]][0] == 1.0
    assert record["snapshots"][-1]["t"] == pytest.approx(2.0)


@pytest.mark.parametrize("tau_min", ["0.104", "0.114", "0.003098"])
def test_simulate_final_snapshot_at_tau_min(runner, tau_min):
    # 1 / (1 / tau_min) lands one ulp above tau_min for these values
    args = ["simulate", "--grid-n", "8", "--tau-min", tau_min, "--snapshots", "3", "--out", "res"]
    with runner.isolated_filesystem():
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        record = json.loads(Path("res/record.json").read_text(encoding="utf-8"))

    times = [row["t"] for row in record["snapshots"]]
    assert len(times) == 4
    assert times[-1] == pytest.approx(1 / float(tau_min), rel=1e-12)


def test_simulate_direct_with_spectra(runner):
    args = [
        "simulate",
        "--solver",
        "direct",
        "--nonlinear",
        "--grid-n",
        "8",
        "--t-end",
        "2",
        "--snapshots",
        "0",
        "--dump-spectra",
        "--out",
        "res",
    ]
    with runner.isolated_filesystem():
        result = runner.invoke(main, args)
        assert result.exit_code == 0, result.output
        record = json.loads(Path("res/record.json").read_text(encoding="utf-8"))
        assert Path("res/spectra.npz").is_file()
    assert record["spectra"] == "spectra.npz"
    assert record["energy"] == {}
    assert len(record["snapshots"]) == 2


def test_sweep_without_values_writes_header_only(runner):
    with runner.isolated_filesystem():
        result = runner.invoke(main, ["sweep", "--axis", "gamma", "--out", "res"])
        assert result.exit_code == 0, result.output
        lines = Path("res/sweep.csv").read_text(encoding="utf-8").splitlines()
    assert lines == [lines[0]] and lines[0].startswith("axis,value,status")


def test_sweep_over_eigenvalues(runner):
    args = ["sweep", "--axis", "lam", "--values=-1", "--values=-2", "--workers", "1"]
    with runner.isolated_filesystem():
        result = runner.invoke(main, [*args, "--out", "res"])
        assert result.exit_code == 0, result.output
        rows = read_csv("res/sweep.csv")
    assert [row["classification"] for row in rows] == ["Growing", "Oscillatory"]
    assert all(row["status"] == "ok" for row in rows)


def test_sweep_records_failed_points(runner):
    # gamma = 1 is rejected per point, not for the whole sweep
    args = ["sweep", "--axis", "gamma", "--values", "1", "--grid-n", "8", "--workers", "1"]
    with runner.isolated_filesystem():
        result = runner.invoke(main, [*args, "--out", "res"])
        assert result.exit_code == 0, result.output
        rows = read_csv("res/sweep.csv")
    assert rows[0]["status"] == "failed"
    assert "gamma" in rows[0]["error"]


@pytest.mark.slow
def test_verify_report(runner):
    with runner.isolated_filesystem():
        result = runner.invoke(main, ["verify", "--grid-n", "8", "--out", "res"])
        report = json.loads(Path("res/verify.json").read_text(encoding="utf-8"))
    assert result.exit_code == (0 if report["passed"] else 1)
    assert [c["name"] for c in report["checks"]] == [
        "growth_exponent",
        "closed_form_oracle",
        "jeans_criterion",
        "matrix_identities",
        "energy_monotonicity",
        "density_bounds",
        "cross_solver",
        "nonlinearity_scaling",
        "spectral_layer",
        "friedmann",
    ]
    assert report["passed"], [c for c in report["checks"] if not c["passed"]]
