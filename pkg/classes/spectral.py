from __future__ import annotations

import itertools
import logging
import math
from typing import Callable

import numpy as np
import scipy.fft
from numpy.typing import NDArray

import config
from classes.exceptions import InvalidParameter, ShapeMismatch
from utils import checks
from utils.cache import cache

log = logging.getLogger(__name__)

FFT_WORKERS: int = config.fft_workers


def set_fft_workers(workers: int) -> None:
    """Fix the scipy.fft worker count. Results are reproducible only for a fixed count."""
    global FFT_WORKERS
    FFT_WORKERS = max(1, int(workers))


class TorusGrid:
    """Uniform n**3 grid on the torus of side `period`."""

    __slots__ = ("n", "period", "dealias")

    def __init__(self, n: int, period: float = 2 * math.pi, dealias: bool = True) -> None:
        self.n: int = checks.power_of_two("n", n)
        self.period: float = checks.positive("period", period)
        self.dealias: bool = dealias

    def __repr__(self) -> str:
        return f"TorusGrid(n={self.n}, period={self.period!r}, dealias={self.dealias})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TorusGrid):
            return NotImplemented
        return (self.n, self.period, self.dealias) == (other.n, other.period, other.dealias)

    def __hash__(self) -> int:
        return hash((self.n, self.period, self.dealias))

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.n, self.n, self.n)

    @property
    def spacing(self) -> float:
        return self.period / self.n

    @property
    def scale(self) -> float:
        """Physical wavenumber of the lattice index 1."""
        return 2 * math.pi / self.period

    def coordinates(self) -> tuple[NDArray[np.float64], ...]:
        return _coordinates(self)

    def indices(self) -> tuple[NDArray[np.float64], ...]:
        """Integer lattice indices (k1, k2, k3) in FFT order, broadcast to the grid shape."""
        return _indices(self)


def _readonly(array: NDArray) -> NDArray:
    array.flags.writeable = False
    return array


@cache(maxsize=32)
def _coordinates(grid: TorusGrid) -> tuple[NDArray[np.float64], ...]:
    axis = np.arange(grid.n) * grid.spacing
    return tuple(_readonly(q) for q in np.meshgrid(axis, axis, axis, indexing="ij"))


@cache(maxsize=32)
def _indices(grid: TorusGrid) -> tuple[NDArray[np.float64], ...]:
    axis = scipy.fft.fftfreq(grid.n, d=1 / grid.n)
    return tuple(_readonly(k) for k in np.meshgrid(axis, axis, axis, indexing="ij"))


@cache(maxsize=32)
def index_squared(grid: TorusGrid) -> NDArray[np.float64]:
    k1, k2, k3 = grid.indices()
    return _readonly(k1**2 + k2**2 + k3**2)


@cache(maxsize=32)
def derivative_symbols(grid: TorusGrid) -> tuple[NDArray[np.complex128], ...]:
    """Multipliers i*k_j of the first derivatives, with the Nyquist coefficient zeroed."""
    symbols = []
    for k in grid.indices():
        symbol = 1j * grid.scale * k
        symbol[k == -grid.n // 2] = 0
        symbols.append(_readonly(symbol))
    return tuple(symbols)


@cache(maxsize=32)
def dealias_mask(grid: TorusGrid) -> NDArray[np.bool_]:
    """2/3 rule: keep coefficients with |k_j| <= n/3 in every direction."""
    cutoff = grid.n / 3
    k1, k2, k3 = grid.indices()
    return _readonly((np.abs(k1) <= cutoff) & (np.abs(k2) <= cutoff) & (np.abs(k3) <= cutoff))


@cache(maxsize=64)
def sobolev_weights(grid: TorusGrid, s: float) -> NDArray[np.float64]:
    return _readonly((1 + index_squared(grid)) ** s)


@cache(maxsize=32)
def band_mask(grid: TorusGrid, kmax: float) -> NDArray[np.bool_]:
    return _readonly(index_squared(grid) <= kmax**2)


class SpectralField:
    """Real field on the torus stored as its full set of Fourier coefficients.

    Coefficients use the forward normalization, so `coeffs[0, 0, 0]` is the
    spatial mean. Instances are immutable.
    """

    __slots__ = ("grid", "coeffs")

    def __init__(self, grid: TorusGrid, coeffs: NDArray[np.complex128]) -> None:
        if coeffs.shape != grid.shape:
            raise ShapeMismatch(grid.shape, coeffs.shape)
        self.grid: TorusGrid = grid
        self.coeffs: NDArray[np.complex128] = _readonly(np.asarray(coeffs, dtype=np.complex128))

    def __repr__(self) -> str:
        return f"<SpectralField grid={self.grid!r} mean={self.mean:.6g}>"

    @classmethod
    def zeros(cls, grid: TorusGrid) -> SpectralField:
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    @classmethod
    def constant(cls, grid: TorusGrid, value: float) -> SpectralField:
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        coeffs[0, 0, 0] = value
        return cls(grid, coeffs)

    @classmethod
    def from_function(
        cls, grid: TorusGrid, func: Callable[[NDArray, NDArray, NDArray], NDArray]
    ) -> SpectralField:
        q1, q2, q3 = grid.coordinates()
        return transform_forward(np.broadcast_to(func(q1, q2, q3), grid.shape), grid)

    @property
    def mean(self) -> float:
        return float(self.coeffs[0, 0, 0].real)

    @property
    def samples(self) -> NDArray[np.float64]:
        return transform_inverse(self)

    def _same_grid(self, other: SpectralField) -> None:
        if other.grid != self.grid:
            raise InvalidParameter("grid", other.grid, f"equal to {self.grid!r}")

    def __add__(self, other: SpectralField) -> SpectralField:
        self._same_grid(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        self._same_grid(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs)

    def __mul__(self, scalar: float) -> SpectralField:
        return SpectralField(self.grid, self.coeffs * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> SpectralField:
        return SpectralField(self.grid, -self.coeffs)


def transform_forward(samples: NDArray[np.floating], grid: TorusGrid) -> SpectralField:
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape != grid.shape:
        raise ShapeMismatch(grid.shape, samples.shape)
    coeffs = scipy.fft.fftn(samples, norm="forward", workers=FFT_WORKERS)
    return SpectralField(grid, coeffs)


def transform_inverse(field: SpectralField) -> NDArray[np.float64]:
    return scipy.fft.ifftn(field.coeffs, norm="forward", workers=FFT_WORKERS).real


def laplacian(field: SpectralField) -> SpectralField:
    grid = field.grid
    return SpectralField(grid, -index_squared(grid) * grid.scale**2 * field.coeffs)


def gradient(field: SpectralField) -> tuple[SpectralField, SpectralField, SpectralField]:
    g1, g2, g3 = (
        SpectralField(field.grid, symbol * field.coeffs)
        for symbol in derivative_symbols(field.grid)
    )
    return g1, g2, g3


def derivative(field: SpectralField, axis: int) -> SpectralField:
    return SpectralField(field.grid, derivative_symbols(field.grid)[axis] * field.coeffs)


def divergence(fields: tuple[SpectralField, ...]) -> SpectralField:
    grid = fields[0].grid
    symbols = derivative_symbols(grid)
    return SpectralField(grid, sum(s * f.coeffs for s, f in zip(symbols, fields)))


def sobolev_norm(field: SpectralField, s: float = 0) -> float:
    s = checks.non_negative("s", s)
    weights = sobolev_weights(field.grid, s)
    return math.sqrt(float(np.sum(weights * np.abs(field.coeffs) ** 2)))


def sobolev_norm_derivative(field: SpectralField, s: int) -> float:
    """Derivative side norm (sum over |alpha| <= s of mean |D^alpha f|**2) ** (1/2)."""
    if s < 0 or int(s) != s:
        raise InvalidParameter("s", s, "a non-negative integer")

    grid = field.grid
    squares = [(grid.scale * k) ** 2 for k in grid.indices()]
    weights = np.zeros(grid.shape)
    for alpha in itertools.product(range(int(s) + 1), repeat=3):
        if sum(alpha) <= s:
            weights += squares[0] ** alpha[0] * squares[1] ** alpha[1] * squares[2] ** alpha[2]
    return math.sqrt(float(np.sum(weights * np.abs(field.coeffs) ** 2)))


def sup_norm(field: SpectralField) -> float:
    return float(np.max(np.abs(transform_inverse(field))))


def dealias(field: SpectralField) -> SpectralField:
    return SpectralField(field.grid, np.where(dealias_mask(field.grid), field.coeffs, 0))


def product(a: SpectralField, b: SpectralField, *, dealiased: bool = True) -> SpectralField:
    """Pointwise product; with `dealiased` both factors and the result obey the 2/3 rule."""
    a._same_grid(b)
    if dealiased:
        a, b = dealias(a), dealias(b)
    result = transform_forward(transform_inverse(a) * transform_inverse(b), a.grid)
    return dealias(result) if dealiased else result


def random_field(
    grid: TorusGrid, rng: np.random.Generator, kmax: None | float = None
) -> SpectralField:
    """Real random field band limited to |k| <= kmax (default n/4)."""
    kmax = grid.n / 4 if kmax is None else kmax
    coeffs = scipy.fft.fftn(rng.standard_normal(grid.shape), norm="forward", workers=FFT_WORKERS)
    return SpectralField(grid, np.where(band_mask(grid, kmax), coeffs, 0))


def estimate_embedding_constant(
    grid: TorusGrid, s: float, samples: int, rng: np.random.Generator
) -> float:
    """Largest observed sup_norm(f) / sobolev_norm(f, s) over random band limited fields."""
    worst = 0.0
    for _ in range(samples):
        field = random_field(grid, rng)
        worst = max(worst, sup_norm(field) / sobolev_norm(field, s))
    log.debug("Embedding constant estimate for s=%s over %d samples: %.6g", s, samples, worst)
    return worst


def estimate_moser_constant(
    grid: TorusGrid, s: float, samples: int, rng: np.random.Generator
) -> float:
    """Largest observed ||f g||_s / (||f||_s ||g||_s) over random band limited pairs."""
    worst = 0.0
    for _ in range(samples):
        f = random_field(grid, rng, grid.n / 6)
        g = random_field(grid, rng, grid.n / 6)
        ratio = sobolev_norm(product(f, g, dealiased=False), s) / (
            sobolev_norm(f, s) * sobolev_norm(g, s)
        )
        worst = max(worst, ratio)
    log.debug("Moser constant estimate for s=%s over %d samples: %.6g", s, samples, worst)
    return worst
