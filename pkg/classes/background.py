from __future__ import annotations

import math
from typing import Sequence

from utils import checks


class PhysicalParams:
    """Gravitational constant and polytropic equation of state p = kappa * rho**gamma."""

    __slots__ = ("G", "kappa", "gamma")

    def __init__(self, G: float = 1.0, kappa: float = 1.0, gamma: float = 4 / 3) -> None:
        self.G: float = checks.positive("G", G)
        self.kappa: float = checks.positive("kappa", kappa)
        self.gamma: float = checks.greater_than("gamma", gamma, 1.0)

    def __repr__(self) -> str:
        return f"PhysicalParams(G={self.G!r}, kappa={self.kappa!r}, gamma={self.gamma!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PhysicalParams):
            return NotImplemented
        return (self.G, self.kappa, self.gamma) == (other.G, other.kappa, other.gamma)

    def __hash__(self) -> int:
        return hash((self.G, self.kappa, self.gamma))

    @property
    def kappa_tilde(self) -> float:
        return self.gamma * self.kappa * (1 / (6 * math.pi * self.G)) ** (self.gamma - 1)

    def to_dict(self) -> dict[str, float]:
        return {"G": self.G, "kappa": self.kappa, "gamma": self.gamma}


class BackgroundState:
    __slots__ = ("t", "rho0", "H", "a", "p0", "kappa_tilde")

    def __init__(
        self, *, t: float, rho0: float, H: float, a: float, p0: float, kappa_tilde: float
    ) -> None:
        self.t: float = t
        self.rho0: float = rho0
        self.H: float = H
        self.a: float = a
        self.p0: float = p0
        self.kappa_tilde: float = kappa_tilde

    def __repr__(self) -> str:
        return (
            f"BackgroundState(t={self.t!r}, rho0={self.rho0!r}, H={self.H!r}, a={self.a!r}, "
            f"p0={self.p0!r}, kappa_tilde={self.kappa_tilde!r})"
        )


def _check_time(t: float) -> float:
    return checks.at_least("t", t, 1.0)


def background_state(t: float, params: PhysicalParams) -> BackgroundState:
    """The exact homogeneous expanding solution at time `t`, with a(1) = 1."""
    t = _check_time(t)
    rho0 = 1 / (6 * math.pi * params.G * t**2)
    return BackgroundState(
        t=t,
        rho0=rho0,
        H=2 / (3 * t),
        a=t ** (2 / 3),
        p0=params.kappa * rho0**params.gamma,
        kappa_tilde=params.kappa_tilde,
    )


def friedmann_residual(t: float, params: PhysicalParams) -> tuple[float, float]:
    """Residuals of mass conservation and of the Friedmann acceleration equation.

    Returns (rho0' + 3 H rho0, H' + H**2 + 4 pi G rho0 / 3) using the analytic
    derivatives of the closed forms.
    """
    state = background_state(t, params)
    rho0_dot = -2 * state.rho0 / t
    H_dot = -2 / (3 * t**2)
    r1 = rho0_dot + 3 * state.H * state.rho0
    r2 = H_dot + state.H**2 + (4 * math.pi * params.G / 3) * state.rho0
    return r1, r2


def hubble_velocity(q: Sequence[float], t: float, params: PhysicalParams) -> tuple[float, ...]:
    """Background velocity v0 = H x of the comoving point `q`, where x = a q."""
    state = background_state(t, params)
    return tuple(state.H * state.a * qi for qi in q)


def background_potential(x: Sequence[float], t: float, params: PhysicalParams) -> float:
    """Newtonian background potential at the Eulerian point `x`.

    The potential grows quadratically in |x| and is not periodic, so it is
    only ever evaluated pointwise.
    """
    state = background_state(t, params)
    return (2 / 3) * math.pi * params.G * state.rho0 * sum(xi * xi for xi in x)


def instantaneous_jeans_wavenumber(t: float, params: PhysicalParams) -> float:
    """Wavenumber where pressure support balances gravity in the linear equation at time `t`.

    Comoving modes with |k| below this value are gravity dominated at `t`. For
    gamma = 4/3 the value does not depend on time.
    """
    t = _check_time(t)
    return math.sqrt(2 / (3 * params.kappa_tilde)) * t ** (params.gamma - 4 / 3)
