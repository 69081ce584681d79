from __future__ import annotations

import pytest

import harness as harness_module
from classes.exceptions import ConfigurationError, InvalidParameter, SolverError
from classes.run_config import RunConfig
from classes.scenario import Scenario, check
from harness import Harness


class Checks(Scenario):
    name = "verify"

    @check("second")
    def b(self):
        return True

    @check("first")
    def a(self):
        return True

    def helper(self):
        return False


def make_scenario(outcome):
    class Fake(Scenario):
        name = "simulate"

        def run(self, cfg: RunConfig) -> int:
            if isinstance(outcome, BaseException):
                raise outcome
            return outcome

    return Fake


def test_checks_are_collected_in_definition_order():
    assert Checks.__checks__ == [("second", "b"), ("first", "a")]
    assert Scenario.__dict__.get("__checks__") is None


def test_base_scenario_is_abstract(tmp_path):
    cfg = RunConfig.resolve("simulate", overrides={"out": str(tmp_path / "out")})
    scenario = make_scenario(0)(Harness())
    assert scenario.output_dir(cfg).is_dir()
    with pytest.raises(NotImplementedError):
        Scenario.run(scenario, cfg)


def test_duplicate_scenario():
    harness = Harness()
    harness.add_scenario(make_scenario(0)(harness))
    with pytest.raises(ConfigurationError):
        harness.add_scenario(make_scenario(0)(harness))


@pytest.mark.parametrize(
    "outcome, code",
    [
        (0, 0),
        (1, 1),
        (InvalidParameter("beta", -1, "> 0"), 2),
        (SolverError("diverged"), 1),
        (RuntimeError("boom"), 1),
    ],
)
def test_run_maps_outcomes_to_exit_codes(outcome, code):
    harness = Harness()
    harness.add_scenario(make_scenario(outcome)(harness))
    assert harness.run(RunConfig.resolve("simulate")) == code


def test_unknown_scenario_exits_with_usage_code():
    harness = Harness()
    harness.add_scenario(make_scenario(0)(harness))
    assert harness.run(RunConfig.resolve("modes")) == 2


def test_load_extensions_registers_every_scenario():
    harness = Harness()
    harness.load_extensions()
    assert set(harness.scenarios) == {"modes", "simulate", "verify", "sweep"}


def test_workers(monkeypatch):
    assert Harness.workers(RunConfig.resolve("sweep", overrides={"axis": "n", "workers": 3})) == 3
    monkeypatch.setattr(harness_module.psutil, "cpu_count", lambda logical=True: None)
    assert Harness.workers(RunConfig.resolve("sweep", overrides={"axis": "n"})) == 1


def test_metadata():
    cfg = RunConfig.resolve("simulate", overrides={"workers": 2})
    metadata = Harness().metadata(cfg)
    assert metadata["version"] == harness_module.__version__
    assert metadata["workers"] == 2
    assert metadata["fft_workers"] == cfg.fft_workers
    assert {"numpy", "scipy"} <= set(metadata)
