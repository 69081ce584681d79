from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from classes.exceptions import InvalidParameter, ShapeMismatch
from classes.spectral import (
    SpectralField,
    TorusGrid,
    dealias,
    dealias_mask,
    derivative,
    divergence,
    estimate_embedding_constant,
    estimate_moser_constant,
    gradient,
    laplacian,
    product,
    random_field,
    sobolev_norm,
    sobolev_norm_derivative,
    sup_norm,
    transform_forward,
    transform_inverse,
)


def plane_wave(grid: TorusGrid, k: tuple[int, int, int]) -> SpectralField:
    coeffs = np.zeros(grid.shape, dtype=np.complex128)
    coeffs[k] = 1.0
    return SpectralField(grid, coeffs)


def cosine(grid: TorusGrid, k: tuple[int, int, int]) -> SpectralField:
    scale = grid.scale
    return SpectralField.from_function(
        grid, lambda q1, q2, q3: np.cos(scale * (k[0] * q1 + k[1] * q2 + k[2] * q3))
    )


@pytest.mark.parametrize("n", [0, 6, 12, 4])
def test_grid_requires_power_of_two(n):
    with pytest.raises(InvalidParameter):
        TorusGrid(n)


def test_grid_geometry():
    grid = TorusGrid(16, period=1.0)
    assert grid.shape == (16, 16, 16)
    assert grid.spacing == pytest.approx(1 / 16)
    assert grid.scale == pytest.approx(2 * math.pi)
    assert TorusGrid(16, 1.0) == grid
    assert TorusGrid(16, 1.0, dealias=False) != grid


def test_constant_transform(grid):
    field = transform_forward(np.full(grid.shape, 2.5), grid)
    assert field.coeffs[0, 0, 0] == pytest.approx(2.5)
    rest = field.coeffs.copy()
    rest[0, 0, 0] = 0
    assert np.max(np.abs(rest)) <= 1e-15
    assert field.mean == pytest.approx(2.5)


def test_cosine_coefficients(grid):
    field = cosine(grid, (1, 0, 0))
    assert field.coeffs[1, 0, 0] == pytest.approx(0.5)
    assert field.coeffs[-1, 0, 0] == pytest.approx(0.5)


def test_shape_mismatch(grid):
    with pytest.raises(ShapeMismatch):
        transform_forward(np.zeros((8, 8, 4)), grid)
    with pytest.raises(ShapeMismatch):
        SpectralField(grid, np.zeros((4, 4, 4), dtype=np.complex128))


def test_round_trip(grid16, rng):
    samples = rng.standard_normal(grid16.shape)
    back = transform_inverse(transform_forward(samples, grid16))
    assert np.max(np.abs(back - samples)) <= 1e-12


def test_fields_are_immutable(grid):
    field = SpectralField.constant(grid, 1.0)
    with pytest.raises(ValueError):
        field.coeffs[0, 0, 0] = 2.0


def test_fields_from_different_grids_do_not_mix(grid):
    with pytest.raises(InvalidParameter):
        SpectralField.zeros(grid) + SpectralField.zeros(TorusGrid(16))


@pytest.mark.parametrize("k, eigenvalue", [((1, 0, 0), -1.0), ((1, 2, 2), -9.0)])
def test_laplacian_plane_waves(grid, k, eigenvalue):
    wave = plane_wave(grid, k)
    assert np.array_equal(laplacian(wave).coeffs, eigenvalue * wave.coeffs)


def test_laplacian_period_scaling():
    grid = TorusGrid(8, period=1.0)
    wave = plane_wave(grid, (0, 1, 0))
    assert laplacian(wave).coeffs[0, 1, 0] == pytest.approx(-4 * math.pi**2)


def test_laplacian_of_constant(grid):
    assert not np.any(laplacian(SpectralField.constant(grid, 3.0)).coeffs)


def test_gradient_of_sine(grid):
    sine = SpectralField.from_function(grid, lambda q1, q2, q3: np.sin(q1))
    g1, g2, g3 = gradient(sine)
    q1 = grid.coordinates()[0]
    assert np.max(np.abs(transform_inverse(g1) - np.cos(q1))) <= 1e-13
    assert np.max(np.abs(transform_inverse(g2))) <= 1e-15
    assert np.max(np.abs(transform_inverse(g3))) <= 1e-15


def test_gradient_plane_wave(grid):
    k = (1, -2, 3)
    wave = plane_wave(grid, k)
    for i, g in enumerate(gradient(wave)):
        assert g.coeffs[k] == pytest.approx(1j * k[i])
    assert derivative(wave, 2).coeffs[k] == pytest.approx(3j)


def test_gradient_drops_nyquist(grid):
    wave = plane_wave(grid, (-4, 0, 0))
    assert not np.any(gradient(wave)[0].coeffs)


def test_divergence_of_gradient_is_laplacian(grid, rng):
    field = random_field(grid, rng)
    assert np.allclose(divergence(gradient(field)).coeffs, laplacian(field).coeffs, atol=1e-14)


def test_sobolev_norm_values(grid):
    assert sobolev_norm(SpectralField.constant(grid, -2.0), 3) == pytest.approx(2.0)
    assert sobolev_norm(plane_wave(grid, (1, 0, 0)), 2) == pytest.approx(2.0)
    with pytest.raises(InvalidParameter):
        sobolev_norm(SpectralField.constant(grid, 1.0), -1)


def test_sobolev_norm_uses_integer_index():
    grid = TorusGrid(8, period=1.0)
    assert sobolev_norm(plane_wave(grid, (1, 0, 0)), 1) == pytest.approx(math.sqrt(2))


def test_sobolev_norm_disjoint_support(grid):
    f, g = plane_wave(grid, (1, 0, 0)), plane_wave(grid, (0, 2, 1))
    assert sobolev_norm(f + g, 3) ** 2 == pytest.approx(
        sobolev_norm(f, 3) ** 2 + sobolev_norm(g, 3) ** 2
    )


def test_derivative_norm_of_constant_and_wave(grid):
    assert sobolev_norm_derivative(SpectralField.constant(grid, 3.0), 2) == pytest.approx(3.0)
    # 1 + k**2 + k**4 for k = (1, 0, 0) and s = 2
    assert sobolev_norm_derivative(plane_wave(grid, (1, 0, 0)), 2) == pytest.approx(math.sqrt(3))
    with pytest.raises(InvalidParameter):
        sobolev_norm_derivative(SpectralField.constant(grid, 3.0), 1.5)  # type: ignore


def test_sup_norm(grid):
    assert sup_norm(SpectralField.constant(grid, -1.5)) == pytest.approx(1.5)
    sine = SpectralField.from_function(grid, lambda q1, q2, q3: np.sin(q1))
    assert sup_norm(sine) == pytest.approx(1.0)


@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_parseval(seed):
    grid = TorusGrid(8)
    field = random_field(grid, np.random.default_rng(seed), kmax=4)
    physical = float(np.mean(transform_inverse(field) ** 2))
    spectral = float(np.sum(np.abs(field.coeffs) ** 2))
    assert abs(physical - spectral) <= 1e-12 * physical


def test_random_field_is_real_and_band_limited(grid16, rng):
    field = random_field(grid16, rng)
    k1, k2, k3 = grid16.indices()
    outside = k1**2 + k2**2 + k3**2 > 16
    assert not np.any(field.coeffs[outside])
    reflected = np.conj(np.roll(np.flip(field.coeffs), 1, axis=(0, 1, 2)))
    assert np.allclose(field.coeffs, reflected, atol=1e-15)


def test_dealias_mask(grid):
    mask = dealias_mask(grid)
    assert mask[2, 0, 0] and not mask[3, 0, 0] and not mask[-3, 0, 0]
    assert not np.any(dealias(plane_wave(grid, (0, 0, 3))).coeffs)


def test_product_of_low_modes_is_exact(grid16):
    a, b = cosine(grid16, (1, 0, 0)), cosine(grid16, (0, 1, 0))
    expected = SpectralField.from_function(grid16, lambda q1, q2, q3: np.cos(q1) * np.cos(q2))
    for dealiased in (True, False):
        result = product(a, b, dealiased=dealiased)
        assert np.allclose(result.coeffs, expected.coeffs, atol=1e-15)


def test_dealiased_product_removes_high_modes(grid):
    high = cosine(grid, (3, 0, 0))
    np.testing.assert_allclose(product(high, high).coeffs, 0.0, atol=1e-15)
    assert np.max(np.abs(product(high, high, dealiased=False).coeffs)) > 1e-3


def test_empirical_constants_are_finite(grid, rng):
    embedding = estimate_embedding_constant(grid, 3, 20, rng)
    moser = estimate_moser_constant(grid, 3, 20, rng)
    assert 0 < embedding < math.inf
    assert 0 < moser < math.inf
