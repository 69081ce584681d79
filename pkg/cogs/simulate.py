from __future__ import annotations

import logging
from pathlib import Path
from typing import TYPE_CHECKING, Any, TypedDict

import numpy as np

from classes.fuchsian import admissible_beta0, check_admissibility, verify_density_bounds
from classes.scenario import Scenario
from classes.simulation import run_simulation
from classes.trajectory import Trajectory
from utils.helpers import save_csv, save_json

if TYPE_CHECKING:
    from classes.run_config import RunConfig
    from harness import Harness

log = logging.getLogger(__name__)

SNAPSHOT_COLUMNS = (
    "t",
    "tau",
    "mean",
    "sup",
    "contrast_min",
    "contrast_max",
    "lower_margin",
    "upper_margin",
    "rho_hs",
    "energy",
)


class Advisory(TypedDict):
    check: str
    passed: bool
    value: float
    bound: float


class TrajectoryRecord(TypedDict, total=False):
    metadata: dict[str, Any]
    config: dict[str, Any]
    advisories: list[Advisory]
    snapshots: list[dict[str, Any]]
    bounds: dict[str, object]
    energy: dict[str, Any]
    stats: dict[str, int]
    spectra: str


def admissibility_advisory(cfg: RunConfig) -> list[Advisory]:
    """Compare beta0 with the global existence bound; never fatal."""
    if cfg.sobolev_s < 3:
        log.debug("Skipping the admissibility advisory for s = %d", cfg.sobolev_s)
        return []

    eps = int(cfg.nonlinear)
    args = (cfg.beta, cfg.params, cfg.sobolev_s, cfg.Cs, cfg.Cm, eps)
    passed = check_admissibility(cfg.beta0, *args)
    return [
        {
            "check": "admissible_beta0",
            "passed": passed,
            "value": cfg.beta0,
            "bound": admissible_beta0(*args),
        }
    ]


def energy_summary(traj: Trajectory) -> dict[str, Any]:
    energy_log = traj.energy_log
    if energy_log is None or not len(energy_log):
        return {}
    return {
        "initial": energy_log.energy[0],
        "final": energy_log.energy[-1],
        "steps": len(energy_log) - 1,
        "max_increase": energy_log.max_increase(),
        "nonincreasing": energy_log.is_nonincreasing(),
        "worst_step": energy_log.worst_step(),
    }


def dump_spectra(path: Path, traj: Trajectory) -> Path:
    with open(path, "wb") as fp:
        np.savez_compressed(
            fp,
            t=traj.times,
            rho=np.stack([s.density.rho.coeffs for s in traj]),
            rho_t=np.stack([s.density.rho_t.coeffs for s in traj]),
        )
    return path


class Simulate(Scenario):
    name = "simulate"

    def record(self, cfg: RunConfig) -> tuple[TrajectoryRecord, Trajectory]:
        advisories = admissibility_advisory(cfg)
        traj = run_simulation(cfg)
        record: TrajectoryRecord = {
            "metadata": self.harness.metadata(cfg),
            "config": cfg.to_dict(),
            "advisories": advisories,
            "snapshots": traj.summaries(cfg.sobolev_s),
            "bounds": verify_density_bounds(traj, cfg.beta).to_dict(),
            "energy": energy_summary(traj),
            "stats": traj.stats.to_dict(),
        }
        return record, traj

    def run(self, cfg: RunConfig) -> int:
        out = self.output_dir(cfg)
        record, traj = self.record(cfg)
        if cfg.dump_spectra:
            record["spectra"] = dump_spectra(out / "spectra.npz", traj).name

        save_json(out / "record.json", record)
        save_csv(out / "snapshots.csv", SNAPSHOT_COLUMNS, record["snapshots"])
        bounds = record["bounds"]
        log.info(
            "Simulation wrote %d snapshots to %s (bound margin %.6g)",
            len(traj),
            out,
            bounds["margin"],
        )
        return 0


def setup(harness: Harness) -> None:
    harness.add_scenario(Simulate(harness))
