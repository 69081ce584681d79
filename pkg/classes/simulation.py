from __future__ import annotations

import logging

import numpy as np

from classes.data import admissible_data
from classes.direct_solver import DirectRunConfig, integrate_direct
from classes.fuchsian import integrate, to_fuchsian
from classes.integrator import StepControl
from classes.run_config import RunConfig
from classes.state import DensityState
from classes.trajectory import Trajectory

log = logging.getLogger(__name__)


def snapshot_times(cfg: RunConfig) -> list[float]:
    """Log spaced physical times in (1, t_final] plus the requested sample times."""
    t_final = cfg.t_final
    spaced = np.geomspace(1.0, t_final, cfg.snapshots + 1)[1:] if cfg.snapshots else []
    times = {float(t) for t in spaced} | {t for t in cfg.times if 1.0 < t <= t_final}
    return sorted(times | {t_final})


def initial_data(cfg: RunConfig, beta0: None | float = None) -> DensityState:
    rng = np.random.default_rng(cfg.seed)
    return admissible_data(
        cfg.grid, cfg.beta, cfg.beta0 if beta0 is None else beta0, cfg.sobolev_s, rng
    )


def run_simulation(
    cfg: RunConfig,
    initial: None | DensityState = None,
    *,
    nonlinear: None | bool = None,
) -> Trajectory:
    """Run the configured solver from `initial` (default: the seeded random data)."""
    initial = initial or initial_data(cfg)
    nonlinear = cfg.nonlinear if nonlinear is None else nonlinear
    times = snapshot_times(cfg)

    if cfg.solver == "fuchsian":
        s0 = to_fuchsian(initial, cfg.beta, cfg.params, nonlinear=nonlinear)
        return integrate(
            s0,
            cfg.tau_min,
            cfg.params,
            control=StepControl(cfg.rtol),
            nonlinear=nonlinear,
            sobolev_order=max(cfg.sobolev_s, 0),
            cfl=cfg.cfl,
            snapshots=[1 / t for t in times],
        )

    direct = DirectRunConfig(
        cfg.params,
        cfg.grid,
        beta=cfg.beta,
        t_end=cfg.t_end,
        nonlinear=nonlinear,
        tol=cfg.rtol,
        cfl=cfg.cfl,
    )
    return integrate_direct(direct, initial, times)
