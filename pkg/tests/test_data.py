from __future__ import annotations

import numpy as np
import pytest

from classes.data import admissible_data, data_norm, sampled_constant_data, single_mode_data
from classes.exceptions import InvalidParameter
from classes.spectral import SpectralField, TorusGrid, band_mask, transform_inverse


@pytest.mark.parametrize("beta0", [0.0, 1e-3, 0.05])
def test_admissible_data_has_requested_size(grid16, rng, beta0):
    d = admissible_data(grid16, 2.0, beta0, 3, rng)
    background = SpectralField.constant(grid16, 1.0)
    delta = d.rho - background
    eta = d.rho_t - (2 / 3) * background
    assert d.t == 1.0
    assert data_norm(delta, eta, 3) == pytest.approx(beta0, rel=1e-12, abs=1e-15)


def test_admissible_data_is_band_limited(grid16, rng):
    d = admissible_data(grid16, 1.0, 0.01, 3, rng)
    outside = ~band_mask(grid16, grid16.n / 4)
    assert not np.any(d.rho.coeffs[outside])
    assert not np.any(d.rho_t.coeffs[outside])


def test_admissible_data_is_seeded(grid):
    first = admissible_data(grid, 1.0, 0.01, 3, np.random.default_rng(7))
    second = admissible_data(grid, 1.0, 0.01, 3, np.random.default_rng(7))
    assert np.array_equal(first.rho.coeffs, second.rho.coeffs)
    assert np.array_equal(first.rho_t.coeffs, second.rho_t.coeffs)


def test_admissible_data_validates(grid, rng):
    with pytest.raises(InvalidParameter):
        admissible_data(grid, 0.0, 0.01, 3, rng)
    with pytest.raises(InvalidParameter):
        admissible_data(grid, 1.0, -0.01, 3, rng)


def test_data_norm_of_zero(grid):
    zero = SpectralField.zeros(grid)
    assert data_norm(zero, zero, 3) == 0.0


def test_single_mode_data(grid):
    d = single_mode_data(grid, (0, 0, 1), 1.0, 0.02)
    q3 = grid.coordinates()[2]
    assert np.allclose(transform_inverse(d.rho), 0.5 + 0.02 * np.cos(q3), atol=1e-15)
    expected_rate = 1 / 3 + (2 / 3) * 0.02 * np.cos(q3)
    assert np.allclose(transform_inverse(d.rho_t), expected_rate, atol=1e-15)
    assert d.rho.coeffs[0, 0, 1] == pytest.approx(0.01)


def test_single_mode_data_on_a_unit_box():
    grid = TorusGrid(8, period=1.0)
    d = single_mode_data(grid, (1, 0, 0), 1.0, 0.1)
    q1 = grid.coordinates()[0]
    assert np.allclose(transform_inverse(d.rho), 0.5 + 0.1 * np.cos(2 * np.pi * q1), atol=1e-14)


def test_sampled_constant_data(grid, rng):
    d = admissible_data(grid, 1.0, 0.01, 3, rng)
    constant = sampled_constant_data(d, (1, 2, 3))
    assert constant.t == 1.0
    assert constant.rho.mean == pytest.approx(transform_inverse(d.rho)[1, 2, 3])
    assert constant.rho_t.mean == pytest.approx(transform_inverse(d.rho_t)[1, 2, 3])
    assert np.count_nonzero(constant.rho.coeffs) == 1
    assert np.count_nonzero(constant.rho_t.coeffs) == 1
    # independent perturbations, not the pure growing branch rho_t = (2/3) rho
    assert abs(constant.rho_t.mean - 2 / 3 * constant.rho.mean) > 1e-6
