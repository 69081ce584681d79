from __future__ import annotations

import numpy as np
from numpy.typing import NDArray

from classes.exceptions import ShapeMismatch
from classes.spectral import SpectralField, TorusGrid
from utils import checks


class DensityState:
    """Fractional density perturbation and its time derivative at physical time t."""

    __slots__ = ("t", "rho", "rho_t")

    def __init__(self, t: float, rho: SpectralField, rho_t: SpectralField) -> None:
        self.t: float = checks.at_least("t", t, 1.0)
        rho._same_grid(rho_t)
        self.rho: SpectralField = rho
        self.rho_t: SpectralField = rho_t

    def __repr__(self) -> str:
        return f"<DensityState t={self.t:.6g} mean={self.rho.mean:.6g}>"

    @property
    def grid(self) -> TorusGrid:
        return self.rho.grid

    def to_array(self) -> NDArray[np.complex128]:
        return np.stack([self.rho.coeffs, self.rho_t.coeffs])

    @classmethod
    def from_array(cls, grid: TorusGrid, t: float, array: NDArray) -> DensityState:
        if array.shape != (2, *grid.shape):
            raise ShapeMismatch((2, *grid.shape), array.shape)
        return cls(t, SpectralField(grid, array[0]), SpectralField(grid, array[1]))


class FuchsianState:
    """The rescaled unknowns (u0, u1, u2, u3, u) at rescaled time tau = 1/t."""

    __slots__ = ("tau", "u0", "u", "w", "beta")

    def __init__(
        self,
        tau: float,
        u0: SpectralField,
        u: tuple[SpectralField, SpectralField, SpectralField],
        w: SpectralField,
        beta: float,
    ) -> None:
        self.tau: float = checks.in_unit_interval("tau", tau)
        for field in (*u, w):
            u0._same_grid(field)
        self.u0: SpectralField = u0
        self.u: tuple[SpectralField, SpectralField, SpectralField] = u
        self.w: SpectralField = w
        self.beta: float = checks.positive("beta", beta)

    def __repr__(self) -> str:
        return f"<FuchsianState tau={self.tau:.6g} beta={self.beta!r}>"

    @property
    def grid(self) -> TorusGrid:
        return self.u0.grid

    @property
    def components(self) -> tuple[SpectralField, ...]:
        return (self.u0, *self.u, self.w)

    def to_array(self) -> NDArray[np.complex128]:
        return np.stack([field.coeffs for field in self.components])

    @classmethod
    def from_array(
        cls, grid: TorusGrid, tau: float, beta: float, array: NDArray
    ) -> FuchsianState:
        if array.shape != (5, *grid.shape):
            raise ShapeMismatch((5, *grid.shape), array.shape)
        fields = [SpectralField(grid, array[a]) for a in range(5)]
        return cls(tau, fields[0], (fields[1], fields[2], fields[3]), fields[4], beta)

    @classmethod
    def zeros(cls, grid: TorusGrid, beta: float, tau: float = 1.0) -> FuchsianState:
        return cls.from_array(grid, tau, beta, np.zeros((5, *grid.shape), dtype=np.complex128))

    def scaled(self, factor: float) -> FuchsianState:
        return FuchsianState.from_array(self.grid, self.tau, self.beta, factor * self.to_array())
