from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np

from classes.spectral import SpectralField, TorusGrid, gradient, random_field, sobolev_norm
from classes.state import DensityState
from utils import checks

log = logging.getLogger(__name__)


def data_norm(delta: SpectralField, eta: SpectralField, s: float) -> float:
    """||delta||_s + ||eta||_s + (sum_i ||D_i delta||_s**2) ** (1/2)."""
    gradient_norm = math.sqrt(sum(sobolev_norm(g, s) ** 2 for g in gradient(delta)))
    return sobolev_norm(delta, s) + sobolev_norm(eta, s) + gradient_norm


def admissible_data(
    grid: TorusGrid,
    beta: float,
    beta0: float,
    sobolev_s: float,
    rng: np.random.Generator,
) -> DensityState:
    """Random band limited perturbation of the background data (beta/2, beta/3) at t = 1.

    The perturbations of the density and of its time derivative are independent
    fields with spectrum |k| <= n/4, rescaled so that their data norm equals `beta0`.
    """
    beta = checks.positive("beta", beta)
    beta0 = checks.non_negative("beta0", beta0)

    delta = random_field(grid, rng)
    eta = random_field(grid, rng)
    size = data_norm(delta, eta, sobolev_s)
    scale = beta0 / size if size > 0 else 0.0

    rho = SpectralField.constant(grid, beta / 2) + scale * delta
    rho_t = SpectralField.constant(grid, beta / 3) + scale * eta
    log.debug("Generated admissible data with beta=%g, beta0=%g (raw size %.6g)", beta, beta0, size)
    return DensityState(1.0, rho, rho_t)


def single_mode_data(
    grid: TorusGrid, k: Sequence[int], beta: float, amplitude: float
) -> DensityState:
    """rho = beta/2 + a cos(k.q), rho_t = beta/3 + (2/3) a cos(k.q) at t = 1.

    The perturbation evolves as a t**(2/3) f(t) with f(1) = 1, f0(1) = 0.
    """
    beta = checks.positive("beta", beta)
    k1, k2, k3 = (int(x) for x in k)
    scale = grid.scale

    def wave(q1, q2, q3):
        return np.cos(scale * (k1 * q1 + k2 * q2 + k3 * q3))

    shape = SpectralField.from_function(grid, wave)
    rho = SpectralField.constant(grid, beta / 2) + amplitude * shape
    rho_t = SpectralField.constant(grid, beta / 3) + (2 / 3) * amplitude * shape
    return DensityState(1.0, rho, rho_t)


def sampled_constant_data(data: DensityState, index: Sequence[int] = (0, 0, 0)) -> DensityState:
    """Spatially constant data carrying the values of `data` at the grid point `index`.

    The density and its time derivative keep their independent perturbations, so the
    k = 0 solution has both its t**(2/3) and its t**(-1) part.
    """
    point = tuple(int(i) for i in index)
    rho = float(data.rho.samples[point])
    rho_t = float(data.rho_t.samples[point])
    return DensityState(
        data.t,
        SpectralField.constant(data.grid, rho),
        SpectralField.constant(data.grid, rho_t),
    )
