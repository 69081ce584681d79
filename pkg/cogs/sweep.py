from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import TYPE_CHECKING, Any

import numpy as np

from classes.exceptions import JeansException
from classes.fuchsian import verify_density_bounds
from classes.modes import ModeSpec, integrate_mode_ode, jeans_classify
from classes.run_config import RunConfig
from classes.scenario import Scenario
from classes.simulation import initial_data, run_simulation
from classes.spectral import set_fft_workers
from utils.helpers import save_csv

if TYPE_CHECKING:
    from harness import Harness

log = logging.getLogger(__name__)

COLUMNS = (
    "axis",
    "value",
    "status",
    "error",
    "t_final",
    "sup",
    "contrast_min",
    "contrast_max",
    "rho_hs",
    "bound_margin",
    "energy_initial",
    "energy_final",
    "nonincreasing",
    "gap",
    "gap_ratio",
    "classification",
    "amp",
)

# sweep axis -> RunConfig field
AXIS_FIELDS = {"gamma": "gamma", "kappa": "kappa", "G": "G", "n": "grid_n", "tol": "rtol"}


def _summary_row(cfg: RunConfig) -> dict[str, Any]:
    traj = run_simulation(cfg)
    final = traj.summaries(cfg.sobolev_s)[-1]
    row: dict[str, Any] = {
        "t_final": final["t"],
        "sup": final["sup"],
        "contrast_min": final["contrast_min"],
        "contrast_max": final["contrast_max"],
        "rho_hs": final["rho_hs"],
        "bound_margin": verify_density_bounds(traj, cfg.beta).margin,
    }
    if traj.energy_log is not None:
        row["energy_initial"] = traj.energy_log.energy[0]
        row["energy_final"] = traj.energy_log.energy[-1]
        row["nonincreasing"] = traj.energy_log.is_nonincreasing()
    return row


def _gap_row(cfg: RunConfig) -> dict[str, Any]:
    """L2 distance of the nonlinear and linear densities at the final time."""
    initial = initial_data(cfg)
    linear = run_simulation(cfg, initial, nonlinear=False)
    nonlinear = run_simulation(cfg, initial, nonlinear=True)
    difference = linear.rho_samples()[-1] - nonlinear.rho_samples()[-1]
    return {
        "t_final": linear.final.t,
        "gap": float(np.sqrt(np.mean(difference**2))),
        "bound_margin": verify_density_bounds(nonlinear, cfg.beta).margin,
    }


def _mode_row(cfg: RunConfig, lam: float) -> dict[str, Any]:
    mode = ModeSpec(lam, cfg.params.kappa_tilde)
    trajectory = integrate_mode_ode(mode, cfg.t_final, cfg.ode_tol, t_eval=[cfg.t_final])
    return {
        "t_final": cfg.t_final,
        "classification": str(jeans_classify(mode, cfg.params)),
        "amp": float(trajectory.amp[-1]),
    }


def run_point(flat: dict[str, Any], value: float) -> dict[str, Any]:
    """One sweep row; failures become rows instead of exceptions."""
    axis = flat["axis"]
    row: dict[str, Any] = {"axis": axis, "value": value, "status": "ok", "error": ""}
    set_fft_workers(flat["fft_workers"])
    try:
        if axis == "lam":
            row.update(_mode_row(RunConfig("sweep", **flat), value))
        elif axis == "eps":
            row.update(_gap_row(RunConfig("sweep", **{**flat, "beta0": value})))
        else:
            field = AXIS_FIELDS[axis]
            changed = int(value) if field == "grid_n" else value
            row.update(_summary_row(RunConfig("sweep", **{**flat, field: changed})))
    except JeansException as e:
        row["status"] = "failed"
        row["error"] = str(e)
    except Exception as e:
        log.exception("Sweep point %s = %g ran into an unexpected error.", axis, value)
        row["status"] = "error"
        row["error"] = f"{type(e).__name__}: {e}"
    return row


def add_gap_ratios(rows: list[dict[str, Any]]) -> None:
    """Ratio of each gap to the next one, the expected O(eps**2) factor for halved amplitudes."""
    for current, following in zip(rows, rows[1:]):
        first, second = current.get("gap"), following.get("gap")
        if first is None or second is None:
            continue
        current["gap_ratio"] = first / second if second > 0 else math.inf


class Sweep(Scenario):
    name = "sweep"

    def run(self, cfg: RunConfig) -> int:
        flat = cfg.to_flat()
        workers = min(self.harness.workers(cfg), max(len(cfg.values), 1))
        log.info("Sweeping %s over %d values with %d workers", cfg.axis, len(cfg.values), workers)

        if workers == 1:
            rows = [run_point(flat, value) for value in cfg.values]
        else:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                rows = list(executor.map(run_point, [flat] * len(cfg.values), cfg.values))

        if cfg.axis == "eps":
            add_gap_ratios(rows)

        failed = sum(row["status"] != "ok" for row in rows)
        if failed:
            log.warning("%d of %d sweep runs failed", failed, len(rows))

        path = save_csv(self.output_dir(cfg) / "sweep.csv", COLUMNS, rows)
        log.info("Wrote %d sweep rows to %s", len(rows), path)
        return 0


def setup(harness: Harness) -> None:
    harness.add_scenario(Sweep(harness))
