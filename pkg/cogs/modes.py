from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING, Any

import numpy as np

from classes.exceptions import OutOfValidity
from classes.modes import (
    ModeSpec,
    closed_form_mode,
    integrate_mode_ode,
    jeans_classify,
    mode_exponents,
)
from classes.scenario import Scenario
from utils.helpers import save_csv

if TYPE_CHECKING:
    from classes.run_config import RunConfig
    from harness import Harness

log = logging.getLogger(__name__)


def amp_column(t: float) -> str:
    return f"amp_t{t:g}"


def header(times: list[float]) -> list[str]:
    return [
        "lam",
        "lam_kappa",
        "classification",
        "mu_plus",
        "mu_minus",
        *(amp_column(t) for t in times),
        "closed_form_error",
    ]


def mode_row(lam: float, cfg: RunConfig) -> dict[str, Any]:
    """Table row of one eigenvalue; amplitudes come from the mode ODE with f(1) = 1, f0(1) = 0."""
    mode = ModeSpec(lam, cfg.params.kappa_tilde)
    classification = jeans_classify(mode, cfg.params)
    row: dict[str, Any] = {
        "lam": lam,
        "lam_kappa": mode.lam_kappa,
        "classification": str(classification),
    }

    t_end = max([*cfg.times, 2.0])
    dense = np.geomspace(1.0, t_end, 101)
    samples = np.unique(np.concatenate([dense, cfg.times]))
    trajectory = integrate_mode_ode(mode, t_end, cfg.ode_tol, t_eval=samples)
    for t in cfg.times:
        row[amp_column(t)] = float(trajectory.amp[np.searchsorted(trajectory.t, t)])

    try:
        row["mu_plus"], row["mu_minus"] = mode_exponents(mode)
    except OutOfValidity:
        row["mu_plus"] = row["mu_minus"] = math.nan
        row["closed_form_error"] = math.nan
    else:
        f, _, _ = closed_form_mode(mode, trajectory.t)
        row["closed_form_error"] = float(np.max(np.abs(trajectory.f - f) / np.abs(f)))
    return row


class Modes(Scenario):
    name = "modes"

    def run(self, cfg: RunConfig) -> int:
        rows = [mode_row(lam, cfg) for lam in cfg.lams]
        path = save_csv(self.output_dir(cfg) / "modes.csv", header(cfg.times), rows)
        log.info("Wrote %d mode rows to %s", len(rows), path)
        return 0


def setup(harness: Harness) -> None:
    harness.add_scenario(Modes(harness))
