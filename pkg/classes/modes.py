from __future__ import annotations

import enum
import logging
import math
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.integrate import solve_ivp

from classes.background import PhysicalParams
from classes.exceptions import InvalidParameter, OutOfValidity, StepSizeUnderflow, UnsupportedIndex
from classes.spectral import SpectralField, index_squared
from classes.state import DensityState
from utils import checks

log = logging.getLogger(__name__)

# |x + 2/3| below this counts as exactly on a boundary of the classification
BOUNDARY_TOL = 1e-12


class JeansClass(enum.Enum):
    growing = "Growing"
    critical = "Critical"
    decaying_real = "DecayingReal"
    degenerate = "Degenerate"
    oscillatory = "Oscillatory"

    def __str__(self) -> str:
        return self.value


class ModeSpec:
    """A Laplacian eigenmode: Delta g = lam * g, with lam <= 0."""

    __slots__ = ("lam", "k", "kappa_tilde")

    def __init__(
        self, lam: float, kappa_tilde: float, k: None | tuple[int, int, int] = None
    ) -> None:
        if not math.isfinite(lam) or lam > 0:
            raise InvalidParameter("lam", lam, "<= 0")
        self.lam: float = float(lam)
        self.kappa_tilde: float = checks.positive("kappa_tilde", kappa_tilde)
        self.k: None | tuple[int, int, int] = k

    @classmethod
    def from_lattice(
        cls, k: Sequence[int], kappa_tilde: float, *, period: float = 2 * math.pi
    ) -> ModeSpec:
        scale = 2 * math.pi / period
        k1, k2, k3 = (int(x) for x in k)
        return cls(-(scale**2) * (k1 * k1 + k2 * k2 + k3 * k3), kappa_tilde, (k1, k2, k3))

    @classmethod
    def from_lam_kappa(cls, lam_kappa: float, kappa_tilde: float = 1.0) -> ModeSpec:
        return cls(lam_kappa / kappa_tilde, kappa_tilde)

    def __repr__(self) -> str:
        return f"ModeSpec(lam={self.lam!r}, kappa_tilde={self.kappa_tilde!r}, k={self.k!r})"

    @property
    def lam_kappa(self) -> float:
        return self.lam * self.kappa_tilde

    @property
    def discriminant(self) -> float:
        return 25 + 36 * self.lam_kappa


def _classify(lam_kappa: float) -> JeansClass:
    if abs(lam_kappa + 2 / 3) <= BOUNDARY_TOL:
        return JeansClass.critical
    if abs(lam_kappa + 25 / 36) <= BOUNDARY_TOL:
        return JeansClass.degenerate
    if lam_kappa > -2 / 3:
        return JeansClass.growing
    if lam_kappa > -25 / 36:
        return JeansClass.decaying_real
    return JeansClass.oscillatory


def _require_radiation_index(params: PhysicalParams) -> None:
    if not math.isclose(params.gamma, 4 / 3, rel_tol=0, abs_tol=1e-12):
        raise UnsupportedIndex(params.gamma)


def jeans_classify(mode: ModeSpec, params: PhysicalParams) -> JeansClass:
    _require_radiation_index(params)
    return _classify(mode.lam_kappa)


def jeans_threshold(params: PhysicalParams) -> float:
    """Eigenvalue above which modes grow: -(6 pi G)**(1/3) / (2 kappa)."""
    _require_radiation_index(params)
    return -((6 * math.pi * params.G) ** (1 / 3)) / (2 * params.kappa)


def validity_threshold(params: PhysicalParams) -> float:
    """Lowest eigenvalue with real growth exponents (zero discriminant)."""
    _require_radiation_index(params)
    return -25 * (6 * math.pi * params.G) ** (1 / 3) / (48 * params.kappa)


class ModeSolution:
    __slots__ = ("mu_plus", "mu_minus", "c_plus", "c_minus", "discriminant")

    def __init__(
        self,
        *,
        mu_plus: float,
        mu_minus: float,
        c_plus: float,
        c_minus: float,
        discriminant: float,
    ) -> None:
        self.mu_plus: float = mu_plus
        self.mu_minus: float = mu_minus
        self.c_plus: float = c_plus
        self.c_minus: float = c_minus
        self.discriminant: float = discriminant

    def __repr__(self) -> str:
        return (
            f"ModeSolution(mu_plus={self.mu_plus!r}, mu_minus={self.mu_minus!r}, "
            f"c_plus={self.c_plus!r}, c_minus={self.c_minus!r})"
        )

    @classmethod
    def from_mode(cls, mode: ModeSpec) -> ModeSolution:
        classification = _classify(mode.lam_kappa)
        if classification in (JeansClass.degenerate, JeansClass.oscillatory):
            raise OutOfValidity(mode.lam_kappa, str(classification))

        root = math.sqrt(mode.discriminant)
        return cls(
            mu_plus=2 / 3 - (5 - root) / 6,
            mu_minus=2 / 3 - (5 + root) / 6,
            c_plus=0.5 + 5 / (2 * root),
            c_minus=0.5 - 5 / (2 * root),
            discriminant=mode.discriminant,
        )

    @property
    def r_plus(self) -> float:
        """Exponent of f (the density divided by t**(2/3))."""
        return self.mu_plus - 2 / 3

    @property
    def r_minus(self) -> float:
        return self.mu_minus - 2 / 3


def mode_exponents(mode: ModeSpec) -> tuple[float, float]:
    solution = ModeSolution.from_mode(mode)
    return solution.mu_plus, solution.mu_minus


def closed_form_mode(mode: ModeSpec, t: ArrayLike) -> tuple[NDArray, NDArray, NDArray]:
    """Exact (f, f0, amp) for the data f(1) = 1, f0(1) = 0, where amp = t**(2/3) f.

    `t` may be a scalar or an array of times >= 1.
    """
    times = np.asarray(t, dtype=np.float64)
    if np.any(times < 1):
        raise InvalidParameter("t", float(np.min(times)), ">= 1")

    sol = ModeSolution.from_mode(mode)
    rp, rm = sol.r_plus, sol.r_minus
    f = sol.c_plus * times**rp + sol.c_minus * times**rm
    f0 = sol.c_plus * rp * times ** (rp - 1) + sol.c_minus * rm * times ** (rm - 1)
    return f, f0, times ** (2 / 3) * f


class ModeTrajectory:
    """Samples (t, f, f0) of one mode ODE solution."""

    __slots__ = ("mode", "t", "f", "f0")

    def __init__(self, mode: ModeSpec, t: NDArray, f: NDArray, f0: NDArray) -> None:
        self.mode: ModeSpec = mode
        self.t: NDArray[np.float64] = t
        self.f: NDArray[np.float64] = f
        self.f0: NDArray[np.float64] = f0

    def __len__(self) -> int:
        return len(self.t)

    @property
    def amp(self) -> NDArray[np.float64]:
        return self.t ** (2 / 3) * self.f


def integrate_mode_ode(
    mode: ModeSpec,
    t_end: float,
    tol: float = 1e-10,
    *,
    initial: tuple[float, float] = (1.0, 0.0),
    t_eval: None | ArrayLike = None,
) -> ModeTrajectory:
    """Integrate f0' = -(8/(3t)) f0 + lam*kappa_tilde f / t**2, f' = f0 from t = 1.

    Valid for every sign of the discriminant; this is the oracle for the
    cases without a closed form.
    """
    t_end = checks.greater_than("t_end", t_end, 1.0)
    tol = checks.positive("tol", tol)
    lam_kappa = mode.lam_kappa

    if t_eval is None:
        times = np.geomspace(1.0, t_end, 101)
    else:
        times = np.asarray(t_eval, dtype=np.float64)
        if np.any(times < 1) or np.any(times > t_end):
            bounds = (float(times.min()), float(times.max()))
            raise InvalidParameter("t_eval", bounds, "in [1, t_end]")

    def rhs(t: float, y: NDArray) -> NDArray:
        f, f0 = y
        return np.array([f0, -(8 / (3 * t)) * f0 + lam_kappa * f / t**2])

    sol = solve_ivp(
        rhs,
        (1.0, t_end),
        np.array(initial, dtype=np.float64),
        method="DOP853",
        t_eval=times,
        rtol=tol,
        atol=tol * 1e-3,
    )
    if not sol.success:
        reached = float(sol.t[-1]) if len(sol.t) else 1.0
        raise StepSizeUnderflow(reached, float("nan"))

    log.debug(
        "Mode ODE lam*kappa=%.6g integrated to t=%.6g (%d rhs calls)", lam_kappa, t_end, sol.nfev
    )
    return ModeTrajectory(mode, sol.t, sol.y[0], sol.y[1])


class InvariantReport:
    __slots__ = ("initial", "drift_h1", "drift_h2")

    def __init__(self, initial: tuple[float, float], drift_h1: float, drift_h2: float) -> None:
        self.initial: tuple[float, float] = initial
        self.drift_h1: float = drift_h1
        self.drift_h2: float = drift_h2

    def __repr__(self) -> str:
        return f"<InvariantReport drift_h1={self.drift_h1:.3e} drift_h2={self.drift_h2:.3e}>"

    @property
    def max_drift(self) -> float:
        return max(self.drift_h1, self.drift_h2)


def fuchsian_2x2_invariants(trajectory: ModeTrajectory, mode: ModeSpec) -> InvariantReport:
    """Drift of the quantities that the diagonalized 2x2 Fuchsian flow conserves.

    With F0 = -t f0, F = f and tau = 1/t the combinations h = F0 + a F, with
    a a root of a**2 + (5/3) a - lam*kappa = 0, scale exactly like tau**(5/3 + a).
    Drifts are relative to the larger of the two initial values.
    """
    if mode.discriminant <= 0:
        raise OutOfValidity(mode.lam_kappa, str(_classify(mode.lam_kappa)))

    root = math.sqrt(mode.discriminant)
    a1, a2 = (-5 + root) / 6, (-5 - root) / 6
    t = trajectory.t
    tau = 1 / t
    big_f0 = -t * trajectory.f0
    big_f = trajectory.f
    q1 = tau ** (-(5 + root) / 6) * (big_f0 + a1 * big_f)
    q2 = tau ** (-(5 - root) / 6) * (big_f0 + a2 * big_f)

    scale = max(abs(q1[0]), abs(q2[0]))
    if scale == 0:
        return InvariantReport((0.0, 0.0), 0.0, 0.0)
    return InvariantReport(
        (float(q1[0]), float(q2[0])),
        float(np.max(np.abs(q1 - q1[0]))) / scale,
        float(np.max(np.abs(q2 - q2[0]))) / scale,
    )


def evolve_linear_field(
    initial: DensityState, t: float, params: PhysicalParams, tol: float = 1e-10
) -> DensityState:
    """Exact linear evolution of general data for gamma = 4/3, one Fourier mode at a time.

    Modes with real exponents use the closed form fitted to (rho, rho_t) at t = 1;
    the others use the mode ODE, one pair of fundamental solutions per |k|**2.
    """
    _require_radiation_index(params)
    t = checks.at_least("t", t, 1.0)
    if initial.t != 1.0:
        raise InvalidParameter("initial.t", initial.t, "== 1")
    if t == 1.0:
        return initial

    grid = initial.rho.grid
    kappa_tilde = params.kappa_tilde
    ksq = index_squared(grid) * grid.scale**2
    rho1, rhot1 = initial.rho.coeffs, initial.rho_t.coeffs
    rho = np.zeros(grid.shape, dtype=np.complex128)
    rho_t = np.zeros(grid.shape, dtype=np.complex128)

    active = (np.abs(rho1) > 0) | (np.abs(rhot1) > 0)
    for value in np.unique(ksq[active]):
        sel = active & (ksq == value)
        mode = ModeSpec(-float(value), kappa_tilde)
        if mode.discriminant > 0 and _classify(mode.lam_kappa) is not JeansClass.degenerate:
            sol = ModeSolution.from_mode(mode)
            mp, mm = sol.mu_plus, sol.mu_minus
            a = (rhot1[sel] - mm * rho1[sel]) / (mp - mm)
            b = rho1[sel] - a
            rho[sel] = a * t**mp + b * t**mm
            rho_t[sel] = a * mp * t ** (mp - 1) + b * mm * t ** (mm - 1)
        else:
            # f = rho / t**(2/3), f0 = f'
            f1 = rho1[sel]
            f01 = rhot1[sel] - (2 / 3) * rho1[sel]
            phi = integrate_mode_ode(mode, t, tol, initial=(1.0, 0.0), t_eval=[t])
            psi = integrate_mode_ode(mode, t, tol, initial=(0.0, 1.0), t_eval=[t])
            f = f1 * phi.f[-1] + f01 * psi.f[-1]
            f0 = f1 * phi.f0[-1] + f01 * psi.f0[-1]
            rho[sel] = t ** (2 / 3) * f
            rho_t[sel] = (2 / 3) * t ** (-1 / 3) * f + t ** (2 / 3) * f0

    return DensityState(t, SpectralField(grid, rho), SpectralField(grid, rho_t))
