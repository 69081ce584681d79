from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from numpy.typing import NDArray
from scipy.interpolate import CubicSpline

from classes.background import PhysicalParams
from classes.exceptions import InvalidParameter, PositivityError, TimeRangeError
from classes.integrator import DormandPrince, StepControl
from classes.spectral import (
    SpectralField,
    TorusGrid,
    gradient,
    laplacian,
    product,
    transform_forward,
    transform_inverse,
)
from classes.state import DensityState
from classes.trajectory import Trajectory
from utils import checks
from utils.time import Stopwatch

log = logging.getLogger(__name__)

# smallest admissible value of 1 + rho in nonlinear runs
POSITIVITY_GUARD = 0.1


class DirectRunConfig:
    __slots__ = ("params", "beta", "t_end", "nonlinear", "grid", "tol", "cfl")

    def __init__(
        self,
        params: PhysicalParams,
        grid: TorusGrid,
        *,
        beta: float = 1.0,
        t_end: float = 100.0,
        nonlinear: bool = False,
        tol: float = 1e-8,
        cfl: float = 0.5,
    ) -> None:
        self.params: PhysicalParams = params
        self.grid: TorusGrid = grid
        self.beta: float = checks.positive("beta", beta)
        self.t_end: float = checks.greater_than("t_end", t_end, 1.0)
        self.nonlinear: bool = nonlinear
        self.tol: float = checks.positive("tol", tol)
        self.cfl: float = checks.positive("cfl", cfl)

    def __repr__(self) -> str:
        return (
            f"DirectRunConfig(params={self.params!r}, grid={self.grid!r}, beta={self.beta!r}, "
            f"t_end={self.t_end!r}, nonlinear={self.nonlinear}, tol={self.tol!r})"
        )


def _check_positivity(rho: NDArray[np.float64], t: float) -> None:
    index = np.unravel_index(np.argmin(rho), rho.shape)
    value = 1 + float(rho[index])
    if not value >= POSITIVITY_GUARD:
        raise PositivityError("1 + rho", tuple(int(i) for i in index), value, t)


def _acceleration(
    t: float, rho: SpectralField, rho_t: SpectralField, params: PhysicalParams, nonlinear: bool
) -> SpectralField:
    kappa_tilde, gamma = params.kappa_tilde, params.gamma
    pressure = kappa_tilde * t ** (-2 * gamma + 2 / 3)
    result = -(4 / (3 * t)) * rho_t + pressure * laplacian(rho) + (2 / (3 * t**2)) * rho

    if nonlinear:
        samples = transform_inverse(rho)
        _check_positivity(samples, t)
        grid = rho.grid
        squares = SpectralField.zeros(grid)
        for g in gradient(rho):
            squares = squares + product(g, g, dealiased=grid.dealias)
        quotient = transform_forward(transform_inverse(squares) / (1 + samples), grid)
        result = result + (gamma - 1) * pressure * quotient
    return result


def direct_rhs(
    d: DensityState, params: PhysicalParams, nonlinear: bool = False
) -> tuple[SpectralField, SpectralField]:
    """(d rho/dt, d^2 rho/dt^2) of the (slightly nonlinear) Jeans equation."""
    return d.rho_t, _acceleration(d.t, d.rho, d.rho_t, params, nonlinear)


def _output_times(t_end: float, times: None | Sequence[float]) -> list[float]:
    requested = {float(t) for t in times or () if 1.0 < t < t_end}
    return sorted(requested | {t_end})


def integrate_direct(
    cfg: DirectRunConfig,
    initial: DensityState,
    times: None | Sequence[float] = None,
) -> Trajectory:
    """Method of lines integration in physical time from t = 1 to `cfg.t_end`.

    Snapshots are stored at t = 1, at every requested time in (1, t_end) and at t_end.
    """
    if initial.t != 1.0:
        raise InvalidParameter("initial.t", initial.t, "== 1")
    if initial.grid != cfg.grid:
        raise InvalidParameter("initial.grid", initial.grid, f"equal to {cfg.grid!r}")

    grid, params = cfg.grid, cfg.params
    if cfg.nonlinear:
        _check_positivity(transform_inverse(initial.rho), 1.0)

    def fun(t: float, y: NDArray) -> NDArray:
        rho, rho_t = SpectralField(grid, y[0]), SpectralField(grid, y[1])
        return np.stack([y[1], _acceleration(t, rho, rho_t, params, cfg.nonlinear).coeffs])

    speed_scale = math.sqrt(params.kappa_tilde)

    def max_step(t: float) -> float:
        return cfg.cfl * grid.spacing / (speed_scale * t ** (-params.gamma + 1 / 3))

    def on_step(t: float, y: NDArray, h: float) -> None:
        log.debug("t=%.6g step=%.3e", t, h)

    trajectory = Trajectory("direct", beta=cfg.beta, nonlinear=cfg.nonlinear)
    trajectory.add(initial)

    outputs = _output_times(cfg.t_end, times)
    stepper = DormandPrince(fun, StepControl(cfg.tol), variable="t")
    with Stopwatch() as watch:
        results = stepper.integrate(
            1.0, initial.to_array(), outputs, max_step=max_step, on_step=on_step
        )
    for t, y in zip(outputs, results):
        trajectory.add(DensityState.from_array(grid, t, y))

    trajectory.stats = stepper.stats
    log.info(
        "Direct run (%s, gamma=%.6g) reached t=%.6g in %s: %d steps",
        "nonlinear" if cfg.nonlinear else "linear",
        params.gamma,
        cfg.t_end,
        watch,
        stepper.stats.accepted,
    )
    return trajectory


class ComparisonReport:
    __slots__ = ("times", "l2", "sup")

    def __init__(self, times: NDArray, l2: NDArray, sup: NDArray) -> None:
        self.times: NDArray[np.float64] = times
        self.l2: NDArray[np.float64] = l2
        self.sup: NDArray[np.float64] = sup

    def __repr__(self) -> str:
        return f"<ComparisonReport max_l2={self.max_l2:.3e} max_sup={self.max_sup:.3e}>"

    @property
    def max_l2(self) -> float:
        return float(self.l2.max()) if len(self.l2) else 0.0

    @property
    def max_sup(self) -> float:
        return float(self.sup.max()) if len(self.sup) else 0.0

    def to_dict(self) -> dict[str, list[float]]:
        return {
            "times": self.times.tolist(),
            "l2": self.l2.tolist(),
            "sup": self.sup.tolist(),
        }


def _sample(traj: Trajectory, times: NDArray) -> NDArray[np.float64]:
    snapshot_times = traj.times
    if len(snapshot_times) == 1:
        if not np.all(times == snapshot_times[0]):
            raise TimeRangeError(
                (float(times.min()), float(times.max())),
                (float(snapshot_times[0]), float(snapshot_times[0])),
            )
        return np.repeat(traj.rho_samples(), len(times), axis=0)

    samples = traj.rho_samples()
    # exact snapshot times are returned as stored
    result = CubicSpline(snapshot_times, samples, axis=0)(times)
    for i, t in enumerate(times):
        hits = np.nonzero(snapshot_times == t)[0]
        if len(hits):
            result[i] = samples[hits[0]]
    return result


def compare_trajectories(
    a: Trajectory, b: Trajectory, times: Sequence[float]
) -> ComparisonReport:
    """Relative L2 and sup errors of rho(a) against rho(b) at `times`.

    Both trajectories are interpolated in time with cubic splines through their snapshots.
    """
    requested = np.asarray(sorted(float(t) for t in times))
    if len(requested) == 0:
        return ComparisonReport(requested, np.zeros(0), np.zeros(0))
    if a.snapshots[0].density.grid != b.snapshots[0].density.grid:
        raise InvalidParameter("grid", a.snapshots[0].density.grid, "shared by both trajectories")

    lo = max(a.times[0], b.times[0])
    hi = min(a.times[-1], b.times[-1])
    if requested[0] < lo - 1e-12 or requested[-1] > hi + 1e-12:
        raise TimeRangeError((float(requested[0]), float(requested[-1])), (float(lo), float(hi)))

    first, second = _sample(a, requested), _sample(b, requested)
    difference = first - second
    axes = (1, 2, 3)
    l2_diff = np.sqrt(np.mean(difference**2, axis=axes))
    l2_ref = np.sqrt(np.mean(second**2, axis=axes))
    sup_diff = np.max(np.abs(difference), axis=axes)
    sup_ref = np.max(np.abs(second), axis=axes)
    l2 = np.where(l2_ref > 0, l2_diff / np.where(l2_ref > 0, l2_ref, 1), l2_diff)
    sup = np.where(sup_ref > 0, sup_diff / np.where(sup_ref > 0, sup_ref, 1), sup_diff)
    return ComparisonReport(requested, l2, sup)
