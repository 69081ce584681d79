from __future__ import annotations

import math
from typing import Any, Iterator, Sequence

import numpy as np
from numpy.typing import NDArray

from classes.integrator import StepStats
from classes.spectral import sobolev_norm, transform_inverse
from classes.state import DensityState, FuchsianState


class EnergyLog:
    """Energy after every accepted step, starting with the initial state."""

    __slots__ = ("tau", "energy", "plain", "derivative")

    def __init__(self) -> None:
        self.tau: list[float] = []
        self.energy: list[float] = []
        self.plain: list[float] = []
        self.derivative: list[float] = []

    def __len__(self) -> int:
        return len(self.tau)

    def append(self, tau: float, energy: float, plain: float, derivative: float) -> None:
        self.tau.append(tau)
        self.energy.append(energy)
        self.plain.append(plain)
        self.derivative.append(derivative)

    def increments(self) -> NDArray[np.float64]:
        """Relative change E[n+1] / E[n] - 1 per accepted step (zero where E[n] is zero)."""
        energy = np.asarray(self.energy)
        if len(energy) < 2:
            return np.zeros(0)
        previous, current = energy[:-1], energy[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(previous > 0, current / previous - 1, np.where(current > 0, np.inf, 0))
        return ratio

    def max_increase(self) -> float:
        increments = self.increments()
        return float(increments.max()) if len(increments) else 0.0

    def is_nonincreasing(self, rtol: float = 1e-8) -> bool:
        return self.max_increase() <= rtol

    def worst_step(self) -> None | dict[str, float]:
        """The step with the largest relative increase, with both norms for diagnosis."""
        increments = self.increments()
        if not len(increments):
            return None
        i = int(np.argmax(increments))
        return {
            "tau": self.tau[i + 1],
            "increase": float(increments[i]),
            "energy": self.energy[i + 1],
            "plain": self.plain[i + 1],
            "derivative": self.derivative[i + 1],
            "derivative_previous": self.derivative[i],
        }


class Snapshot:
    __slots__ = ("density", "state")

    def __init__(self, density: DensityState, state: None | FuchsianState = None) -> None:
        self.density: DensityState = density
        self.state: None | FuchsianState = state

    @property
    def t(self) -> float:
        return self.density.t


class Trajectory:
    """Snapshots of one run, strictly increasing in physical time."""

    def __init__(
        self,
        solver: str,
        *,
        beta: float,
        nonlinear: bool,
        energy_log: None | EnergyLog = None,
    ) -> None:
        self.solver: str = solver
        self.beta: float = beta
        self.nonlinear: bool = nonlinear
        self.snapshots: list[Snapshot] = []
        self.energy_log: None | EnergyLog = energy_log
        self.stats: StepStats = StepStats()

    def __repr__(self) -> str:
        return f"<Trajectory solver={self.solver} snapshots={len(self.snapshots)}>"

    def __len__(self) -> int:
        return len(self.snapshots)

    def __iter__(self) -> Iterator[Snapshot]:
        return iter(self.snapshots)

    def add(self, density: DensityState, state: None | FuchsianState = None) -> None:
        if self.snapshots and density.t <= self.snapshots[-1].t:
            raise ValueError("snapshots must be added in increasing time")
        self.snapshots.append(Snapshot(density, state))

    @property
    def times(self) -> NDArray[np.float64]:
        return np.array([snapshot.t for snapshot in self.snapshots])

    @property
    def final(self) -> Snapshot:
        return self.snapshots[-1]

    def rho_samples(self) -> NDArray[np.float64]:
        return np.stack([transform_inverse(snapshot.density.rho) for snapshot in self.snapshots])

    def summaries(self, sobolev_s: float) -> list[dict[str, Any]]:
        """Per snapshot statistics of the density contrast rho / (beta t**(2/3))."""
        rows = []
        for snapshot in self.snapshots:
            t = snapshot.t
            rho = transform_inverse(snapshot.density.rho)
            scaled = rho / (self.beta * t ** (2 / 3))
            row: dict[str, Any] = {
                "t": t,
                "tau": 1 / t,
                "mean": float(rho.mean()),
                "sup": float(np.abs(rho).max()),
                "contrast_min": float(scaled.min()),
                "contrast_max": float(scaled.max()),
                "lower_margin": float(scaled.min() - 0.25),
                "upper_margin": float(0.75 - scaled.max()),
                "rho_hs": sobolev_norm(snapshot.density.rho, sobolev_s),
            }
            row["energy"] = _energy_at(self.energy_log, 1 / t)
            rows.append(row)
        return rows


def growth_exponent(times: Sequence[float], values: Sequence[float]) -> float:
    """Least squares slope of log(value) against log(time)."""
    slope, _ = np.polyfit(np.log(np.asarray(times)), np.log(np.asarray(values)), 1)
    return float(slope)


def _energy_at(log: None | EnergyLog, tau: float) -> float:
    if log is None:
        return math.nan
    for logged, energy in zip(log.tau, log.energy):
        if math.isclose(logged, tau, rel_tol=1e-12):
            return energy
    return math.nan
