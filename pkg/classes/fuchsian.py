from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from classes.background import PhysicalParams
from classes.exceptions import (
    EnergyOverflow,
    InvalidParameter,
    PositivityError,
    StepSizeUnderflow,
)
from classes.integrator import DormandPrince, StepControl
from classes.spectral import (
    SpectralField,
    TorusGrid,
    derivative_symbols,
    gradient,
    product,
    sobolev_norm_derivative,
    sobolev_weights,
    transform_forward,
    transform_inverse,
)
from classes.state import DensityState, FuchsianState
from classes.trajectory import EnergyLog, Trajectory
from utils import checks
from utils.cache import cache
from utils.time import Stopwatch

__all__ = (
    "DensityState",
    "FuchsianState",
    "SystemMatrices",
    "assemble_matrices",
    "to_fuchsian",
    "from_fuchsian",
    "rhs",
    "integrate",
    "energy",
    "spatial_energy_rate",
    "singular_energy_rate",
    "lambda_zero",
    "admissible_beta0",
    "check_admissibility",
    "verify_density_bounds",
)

log = logging.getLogger(__name__)

SQRT6 = math.sqrt(6)

# energies above this abort the run
ENERGY_CEILING = 1e100

# requested snapshots this close to an end point collapse onto it
SNAPSHOT_RTOL = 1e-12


class SystemMatrices:
    """Constant matrices of the first order system

        B0 dU/dtau + tau**(gamma - 7/3) Bi D_i U = (1/tau) calB P U + (eps/tau) H.

    Components are ordered (u0, u1, u2, u3, u).
    """

    __slots__ = ("gamma", "kappa_tilde", "B0", "Bi", "calB", "P")

    def __init__(
        self,
        gamma: float,
        kappa_tilde: float,
        B0: NDArray[np.float64],
        Bi: tuple[NDArray[np.float64], ...],
        calB: NDArray[np.float64],
        P: NDArray[np.float64],
    ) -> None:
        self.gamma: float = gamma
        self.kappa_tilde: float = kappa_tilde
        self.B0: NDArray[np.float64] = B0
        self.Bi: tuple[NDArray[np.float64], ...] = Bi
        self.calB: NDArray[np.float64] = calB
        self.P: NDArray[np.float64] = P

    def __repr__(self) -> str:
        return f"SystemMatrices(gamma={self.gamma!r}, kappa_tilde={self.kappa_tilde!r})"

    @property
    def B0_diagonal(self) -> NDArray[np.float64]:
        return np.diag(self.B0).copy()

    @property
    def singular(self) -> NDArray[np.float64]:
        """(B0)^-1 calB P."""
        return np.linalg.solve(self.B0, self.calB @ self.P)


@cache(maxsize=64)
def assemble_matrices(gamma: float, kappa_tilde: float) -> SystemMatrices:
    gamma = checks.greater_than("gamma", gamma, 1.0)
    kappa_tilde = checks.positive("kappa_tilde", kappa_tilde)

    B0 = np.diag([1.0, kappa_tilde, kappa_tilde, kappa_tilde, 1.0])

    Bi = []
    for i in range(1, 4):
        B = np.zeros((5, 5))
        B[0, i] = B[i, 0] = kappa_tilde
        Bi.append(B)

    shift = gamma - 2 / 3
    calB = np.diag([5 / 3, kappa_tilde * shift, kappa_tilde * shift, kappa_tilde * shift, 5 / 3])

    P = np.eye(5)
    P[0, 0], P[0, 4] = 3 / 5, -SQRT6 / 5
    P[4, 0], P[4, 4] = -SQRT6 / 5, 2 / 5

    for array in (B0, *Bi, calB, P):
        array.flags.writeable = False
    return SystemMatrices(gamma, kappa_tilde, B0, tuple(Bi), calB, P)


def _matrices_for(params: PhysicalParams) -> SystemMatrices:
    return assemble_matrices(params.gamma, params.kappa_tilde)


def _denominator(w: SpectralField, beta: float, tau: float) -> NDArray[np.float64]:
    return SQRT6 * transform_inverse(w) + beta + 2 * tau ** (2 / 3)


def _check_denominator(denominator: NDArray[np.float64], tau: float) -> None:
    index = np.unravel_index(np.argmin(denominator), denominator.shape)
    value = float(denominator[index])
    if not value > 0:
        raise PositivityError(
            "sqrt(6) u + beta + 2 tau^(2/3)", tuple(int(i) for i in index), value, tau
        )


def to_fuchsian(
    d: DensityState, beta: float, params: PhysicalParams, *, nonlinear: bool = False
) -> FuchsianState:
    beta = checks.positive("beta", beta)
    t = d.t
    grid = d.grid
    background = SpectralField.constant(grid, 1.0)

    w = (SQRT6 / 3) * t ** (-2 / 3) * d.rho - (SQRT6 / 6) * beta * background
    u0 = t ** (1 / 3) * d.rho_t - (beta / 3) * background
    scale = t ** (2 / 3 - params.gamma)
    g1, g2, g3 = gradient(d.rho)
    state = FuchsianState(1 / t, u0, (scale * g1, scale * g2, scale * g3), w, beta)

    if nonlinear:
        _check_denominator(_denominator(w, beta, state.tau), state.tau)
    return state


def from_fuchsian(s: FuchsianState) -> DensityState:
    t = 1 / s.tau
    background = SpectralField.constant(s.grid, 1.0)
    rho = t ** (2 / 3) * ((3 / SQRT6) * s.w + (s.beta / 2) * background)
    rho_t = t ** (-1 / 3) * (s.u0 + (s.beta / 3) * background)
    return DensityState(t, rho, rho_t)


def _nonlinear_source(
    grid: TorusGrid, array: NDArray, tau: float, beta: float, m: SystemMatrices
) -> NDArray[np.complex128]:
    """Coefficients of the nonlinear source in the u0 slot.

    H0 = -2 kappa_tilde (gamma - 1) |u_i|**2 / (sqrt(6) u + beta + 2 tau**(2/3))
    """
    w = SpectralField(grid, array[4])
    denominator = _denominator(w, beta, tau)
    _check_denominator(denominator, tau)

    squares = SpectralField.zeros(grid)
    for i in range(1, 4):
        u_i = SpectralField(grid, array[i])
        squares = squares + product(u_i, u_i, dealiased=grid.dealias)

    # the quotient is not dealiased
    quotient = transform_inverse(squares) / denominator
    return -2 * m.kappa_tilde * (m.gamma - 1) * transform_forward(quotient, grid).coeffs


def _principal(grid: TorusGrid, array: NDArray, m: SystemMatrices) -> NDArray[np.complex128]:
    """sum_i Bi D_i U."""
    result = np.zeros_like(array)
    for B, symbol in zip(m.Bi, derivative_symbols(grid)):
        result += np.einsum("ab,b...->a...", B, symbol * array)
    return result


def _rhs_sigma(
    grid: TorusGrid,
    sigma: float,
    array: NDArray,
    m: SystemMatrices,
    beta: float,
    nonlinear: bool,
) -> NDArray[np.complex128]:
    """dU/dsigma with sigma = -ln(tau): (B0)^-1 [tau**(gamma-4/3) Bi D_i U - calB P U - eps H]."""
    tau = math.exp(-sigma)
    bracket = tau ** (m.gamma - 4 / 3) * _principal(grid, array, m)
    bracket -= np.einsum("ab,b...->a...", m.calB @ m.P, array)
    if nonlinear:
        bracket[0] -= _nonlinear_source(grid, array, tau, beta, m)
    return bracket / m.B0_diagonal.reshape(5, 1, 1, 1)


def rhs(
    s: FuchsianState, m: SystemMatrices, params: PhysicalParams, nonlinear: bool = False
) -> tuple[SpectralField, ...]:
    """dU/dtau as the five fields (du0, du1, du2, du3, du)."""
    if not (
        math.isclose(m.gamma, params.gamma) and math.isclose(m.kappa_tilde, params.kappa_tilde)
    ):
        raise InvalidParameter("m", m, f"assembled for {params!r}")

    sigma = -math.log(s.tau)
    derivative = -_rhs_sigma(s.grid, sigma, s.to_array(), m, s.beta, nonlinear) / s.tau
    return tuple(SpectralField(s.grid, derivative[a]) for a in range(5))


def _hs_squares(array: NDArray, weights: NDArray) -> NDArray[np.float64]:
    return np.array([float(np.sum(weights * np.abs(component) ** 2)) for component in array])


def energy(
    s: FuchsianState, sobolev_order: float = 3, m: None | SystemMatrices = None
) -> float:
    """H^s energy of the state.

    Given the system matrices every component norm is weighted by the matching
    diagonal entry of B0, the quadratic form the principal part is skew for.
    Without them the plain sum of the component norms is returned.
    """
    squares = _hs_squares(s.to_array(), sobolev_weights(s.grid, float(sobolev_order)))
    if m is not None:
        squares = squares * m.B0_diagonal
    return math.sqrt(float(squares.sum()))


def derivative_energy(s: FuchsianState, m: SystemMatrices, sobolev_order: int = 3) -> float:
    """Weighted energy computed with the derivative side Sobolev norm."""
    squares = [sobolev_norm_derivative(field, sobolev_order) ** 2 for field in s.components]
    return math.sqrt(float(np.dot(m.B0_diagonal, squares)))


def _inner(a: NDArray, b: NDArray, weights: NDArray) -> float:
    return float(np.sum(weights * (np.conj(a) * b).real))


def spatial_energy_rate(s: FuchsianState, m: SystemMatrices, sobolev_order: float = 3) -> float:
    """Contribution of the principal part to d(weighted energy**2)/dtau.

    Zero up to round-off since the Bi are symmetric and the derivatives skew.
    """
    array = s.to_array()
    weights = sobolev_weights(s.grid, float(sobolev_order))
    spatial = -(s.tau ** (m.gamma - 7 / 3)) * _principal(s.grid, array, m)
    return 2 * _inner(array, spatial, weights)


def singular_energy_rate(
    s: FuchsianState, m: SystemMatrices, sobolev_order: float = 3
) -> tuple[float, float]:
    """(<PU, calB PU>_s, min(5/3, gamma - 2/3) ||PU||_s**2) with the B0 weighted norm.

    The first value is tau times the singular contribution to
    d(weighted energy**2)/dtau divided by two; it is bounded below by the second.
    """
    array = s.to_array()
    weights = sobolev_weights(s.grid, float(sobolev_order))
    projected = np.einsum("ab,b...->a...", m.P, array)
    rate = _inner(projected, np.einsum("ab,b...->a...", m.calB, projected), weights)
    squares = _hs_squares(projected, weights)
    bound = min(5 / 3, m.gamma - 2 / 3) * float(np.dot(m.B0_diagonal, squares))
    return rate, bound


def lambda_zero(gamma: float, kappa_tilde: float) -> float:
    return min(5 / 3, gamma - 2 / 3) / max(1.0, 1 / kappa_tilde)


def admissible_beta0(
    beta: float,
    params: PhysicalParams,
    s: float = 3,
    Cs: float = 2.0,
    Cm: float = 10.0,
    eps: int = 1,
) -> float:
    """Largest data size covered by the global existence estimate.

    min(beta / (8 Cs), (lambda0 / (eps Cm)) ** (1 / (s + 1)) / 2), where the
    second term is dropped for linear runs (eps = 0).
    """
    beta = checks.positive("beta", beta)
    s = checks.at_least("s", s, 3)
    Cs = checks.positive("Cs", Cs)
    Cm = checks.positive("Cm", Cm)
    if eps not in (0, 1):
        raise InvalidParameter("eps", eps, "0 or 1")

    first = beta / (8 * Cs)
    if eps == 0:
        return first
    lam0 = lambda_zero(params.gamma, params.kappa_tilde)
    return min(first, 0.5 * (lam0 / (eps * Cm)) ** (1 / (s + 1)))


def check_admissibility(
    beta0: float,
    beta: float,
    params: PhysicalParams,
    s: float = 3,
    Cs: float = 2.0,
    Cm: float = 10.0,
    eps: int = 1,
) -> bool:
    """Advisory check of `beta0` against `admissible_beta0`; logs a warning when exceeded."""
    bound = admissible_beta0(beta, params, s, Cs, Cm, eps)
    if beta0 > bound:
        log.warning(
            "beta0 = %.6g exceeds the admissible bound %.6g (Cs=%g, Cm=%g); proceeding anyway.",
            beta0,
            bound,
            Cs,
            Cm,
        )
        return False
    return True


def _snapshot_taus(tau_min: float, snapshots: None | Sequence[float]) -> list[float]:
    """Snapshot taus in descending order, ending at `tau_min`.

    Requested values within a relative SNAPSHOT_RTOL of tau_min or 1 are dropped, as is
    any value whose sigma does not strictly exceed the previous one.
    """
    lower, upper = tau_min * (1 + SNAPSHOT_RTOL), 1.0 - SNAPSHOT_RTOL
    requested = sorted({float(tau) for tau in snapshots or () if lower < tau < upper})
    sigma_min = -math.log(tau_min)
    taus: list[float] = []
    last = 0.0
    for tau in reversed(requested):
        sigma = -math.log(tau)
        if last < sigma < sigma_min:
            taus.append(tau)
            last = sigma
    return [*taus, tau_min]


def integrate(
    s0: FuchsianState,
    tau_min: float,
    params: PhysicalParams,
    *,
    control: None | StepControl = None,
    nonlinear: bool = False,
    sobolev_order: int = 3,
    cfl: float = 0.5,
    snapshots: None | Sequence[float] = None,
) -> Trajectory:
    """Advance `s0` from tau = 1 down to `tau_min`.

    Integration runs in sigma = -ln(tau). Snapshots are stored at tau = 1, at
    every requested tau in (tau_min, 1) and at tau_min; the energy log holds
    every accepted step.
    """
    if s0.tau != 1.0:
        raise InvalidParameter("s0.tau", s0.tau, "== 1")
    tau_min = checks.in_unit_interval("tau_min", tau_min)
    if tau_min == 1.0:
        raise InvalidParameter("tau_min", tau_min, "< 1")
    cfl = checks.positive("cfl", cfl)

    m = _matrices_for(params)
    grid, beta = s0.grid, s0.beta
    control = control or StepControl()
    taus = _snapshot_taus(tau_min, snapshots)

    energy_log = EnergyLog()
    trajectory = Trajectory("fuchsian", beta=beta, nonlinear=nonlinear, energy_log=energy_log)

    def record(tau: float, state: FuchsianState) -> float:
        value = energy(state, sobolev_order, m)
        energy_log.append(
            tau,
            value,
            energy(state, sobolev_order),
            derivative_energy(state, m, sobolev_order),
        )
        return value

    if nonlinear:
        _check_denominator(_denominator(s0.w, beta, 1.0), 1.0)
    record(1.0, s0)
    trajectory.add(from_fuchsian(s0), s0)

    def fun(sigma: float, y: NDArray) -> NDArray:
        return _rhs_sigma(grid, sigma, y, m, beta, nonlinear)

    def max_step(sigma: float) -> float:
        speed = math.sqrt(m.kappa_tilde) * math.exp(-sigma) ** (m.gamma - 4 / 3)
        return cfl * grid.spacing / speed

    def on_step(sigma: float, y: NDArray, h: float) -> None:
        tau = math.exp(-sigma)
        state = FuchsianState.from_array(grid, min(tau, 1.0), beta, y)
        value = record(tau, state)
        if not math.isfinite(value) or value > ENERGY_CEILING:
            raise EnergyOverflow(tau, value)
        log.debug("sigma=%.6g tau=%.6g step=%.3e energy=%.10g", sigma, tau, h, value)

    stepper = DormandPrince(fun, control, variable="sigma")
    sigmas = [-math.log(tau) for tau in taus]
    with Stopwatch() as watch:
        try:
            results = stepper.integrate(
                0.0, s0.to_array(), sigmas, max_step=max_step, on_step=on_step
            )
        except StepSizeUnderflow as e:
            raise StepSizeUnderflow(math.exp(-e.reached), e.step, variable="tau") from e

    for tau, y in zip(taus, results):
        state = FuchsianState.from_array(grid, tau, beta, y)
        trajectory.add(from_fuchsian(state), state)

    trajectory.stats = stepper.stats
    growth = energy_log.max_increase()
    if growth > 1e-8:
        log.warning(
            "Energy increased by %.3e relative within one step (tau=%.6g).",
            growth,
            (energy_log.worst_step() or {}).get("tau", math.nan),
        )

    log.info(
        "Fuchsian run (%s, gamma=%.6g) reached tau=%.3g in %s: %d steps, energy %.6g -> %.6g",
        "nonlinear" if nonlinear else "linear",
        m.gamma,
        tau_min,
        watch,
        stepper.stats.accepted,
        energy_log.energy[0],
        energy_log.energy[-1],
    )
    return trajectory


class BoundsReport:
    __slots__ = ("holds", "margin", "absolute_margin", "t", "index")

    def __init__(
        self,
        holds: bool,
        margin: float,
        absolute_margin: float,
        t: float,
        index: tuple[int, ...],
    ) -> None:
        self.holds: bool = holds
        self.margin: float = margin
        self.absolute_margin: float = absolute_margin
        self.t: float = t
        self.index: tuple[int, ...] = index

    def __repr__(self) -> str:
        return f"<BoundsReport holds={self.holds} margin={self.margin:.6g} t={self.t:.6g}>"

    def to_dict(self) -> dict[str, object]:
        return {
            "holds": self.holds,
            "margin": self.margin,
            "absolute_margin": self.absolute_margin,
            "t": self.t,
            "index": list(self.index),
        }


def verify_density_bounds(traj: Trajectory, beta: float) -> BoundsReport:
    """Check beta t**(2/3) / 4 <= rho <= 3 beta t**(2/3) / 4 on every snapshot.

    `margin` is the worst distance to either bound relative to beta t**(2/3);
    negative means the bound is violated.
    """
    beta = checks.positive("beta", beta)
    worst: None | BoundsReport = None
    for snapshot in traj:
        t = snapshot.t
        scale = beta * t ** (2 / 3)
        rho = transform_inverse(snapshot.density.rho)
        distance = np.minimum(rho / scale - 0.25, 0.75 - rho / scale)
        index = np.unravel_index(np.argmin(distance), distance.shape)
        margin = float(distance[index])
        if worst is None or margin < worst.margin:
            worst = BoundsReport(
                margin >= 0, margin, margin * scale, t, tuple(int(i) for i in index)
            )

    if worst is None:
        return BoundsReport(True, math.inf, math.inf, math.nan, ())
    worst.holds = worst.margin >= 0
    return worst
