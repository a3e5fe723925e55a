"""Spatial discretization tests: spectral derivatives against analytic and
finite-difference oracles, dealiased products against fine-grid references,
norms and integrals against closed forms."""

import numpy as np
import pytest

from kineticfluid.errors import ConfigurationError, OrderError, ShapeError
from kineticfluid.spectral import Grid, multi_indices


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        Grid(dim_x=1, n=8)
    with pytest.raises(ConfigurationError):
        Grid(dim_x=1, n=17)
    with pytest.raises(ConfigurationError):
        Grid(dim_x=1, n=32, box=-1.0)
    with pytest.raises(ConfigurationError):
        Grid(dim_x=4, n=32)


def test_derivative_of_constant_is_zero():
    grid = Grid(dim_x=2, n=16)
    f = np.full(grid.shape, 3.7)
    assert np.abs(grid.derivative(f, (1, 0))).max() == 0.0


def test_derivative_analytic_sine():
    grid = Grid(dim_x=1, n=64, box=2 * np.pi)
    x = grid.x[0].ravel()
    f = np.sin(x)
    df = grid.derivative(f, (1,))
    assert np.abs(df - np.cos(x)).max() <= 1e-12
    grid2 = Grid(dim_x=1, n=64, box=4.0)
    f2 = np.sin(2 * np.pi * grid2.x[0].ravel() / 4.0)
    df2 = grid2.derivative(f2, (1,))
    assert np.abs(df2 - (2 * np.pi / 4.0) * np.cos(2 * np.pi * grid2.x[0].ravel() / 4.0)).max() <= 1e-12


def test_second_derivative_fd_oracle_converges():
    # the spectral value is the limit of second differences under h-refinement
    rng = np.random.default_rng(0)
    coeffs = rng.standard_normal(4)
    def func(x):
        return sum(c * np.cos((m + 1) * x + 0.3 * m) for m, c in enumerate(coeffs))
    grid = Grid(dim_x=1, n=64)
    x = grid.x[0].ravel()
    spectral = grid.derivative(func(x), (2,))
    errs = []
    for n_fine in (256, 512, 1024):
        xf = np.arange(n_fine) * (2 * np.pi / n_fine)
        h = xf[1] - xf[0]
        fd = (func(xf + h) - 2 * func(xf) + func(xf - h)) / h**2
        errs.append(np.abs(fd[:: n_fine // 64] - spectral).max())
    assert errs[0] > errs[1] > errs[2]
    assert errs[1] / errs[2] == pytest.approx(4.0, rel=0.1)   # O(h^2)


def test_derivative_commutes():
    rng = np.random.default_rng(1)
    grid = Grid(dim_x=2, n=32)
    f = grid.dealias(rng.standard_normal(grid.shape))
    a = grid.derivative(grid.derivative(f, (1, 0)), (0, 2), max_order=3)
    b = grid.derivative(f, (1, 2), max_order=3)
    assert np.abs(a - b).max() <= 1e-12


def test_derivative_order_cap():
    grid = Grid(dim_x=1, n=32)
    f = np.zeros(grid.shape)
    with pytest.raises(OrderError):
        grid.derivative(f, (5,))
    # explicit raise of the cap is allowed
    grid.derivative(f, (5,), max_order=5)


def test_product_identity_with_one():
    rng = np.random.default_rng(2)
    grid = Grid(dim_x=1, n=64)
    f = grid.dealias(rng.standard_normal(grid.shape))
    one = np.ones(grid.shape)
    assert np.abs(grid.product(one, f) - f).max() <= 1e-13


def test_product_trig_identity():
    grid = Grid(dim_x=1, n=64)
    x = grid.x[0].ravel()
    k = 5   # 2k within the kept band (kmax = 21)
    f = np.sin(k * x)
    prod = grid.product(f, f)
    assert np.abs(prod - (0.5 - 0.5 * np.cos(2 * k * x))).max() <= 1e-12


def test_product_fine_grid_oracle():
    # dealiased product equals the full-resolution product computed on a
    # twice-finer grid, then truncated to the kept band
    rng = np.random.default_rng(3)
    grid = Grid(dim_x=1, n=64)
    fine = Grid(dim_x=1, n=128)
    kmax = grid.kmax_keep
    spec_f = np.zeros(64 // 2 + 1, complex)
    spec_g = np.zeros(64 // 2 + 1, complex)
    for s in (spec_f, spec_g):
        s[1 : kmax + 1] = rng.standard_normal(kmax) + 1j * rng.standard_normal(kmax)
        s[0] = rng.standard_normal()
    f = np.fft.irfft(spec_f, 64)
    g = np.fft.irfft(spec_g, 64)
    # same fields on the fine grid (zero-padded spectra, norm-preserving)
    f_fine = np.fft.irfft(np.concatenate([spec_f, np.zeros(32, complex)]), 128) * 2
    g_fine = np.fft.irfft(np.concatenate([spec_g, np.zeros(32, complex)]), 128) * 2
    prod_fine_spec = np.fft.rfft(f_fine * g_fine) / 2
    trunc = np.zeros(33, complex)
    trunc[: kmax + 1] = prod_fine_spec[: kmax + 1]
    oracle = np.fft.irfft(trunc, 64)
    got = grid.product(f, g)
    assert np.abs(got - oracle).max() <= 1e-12


def test_product_shape_error():
    grid = Grid(dim_x=1, n=64)
    with pytest.raises(ShapeError):
        grid.product(np.zeros(64), np.zeros(32))


def test_dealias_idempotent():
    rng = np.random.default_rng(4)
    grid = Grid(dim_x=2, n=32)
    f = rng.standard_normal(grid.shape)
    once = grid.dealias(f)
    twice = grid.dealias(once)
    assert np.abs(once - twice).max() <= 1e-14


def test_sobolev_zero_and_sine():
    grid = Grid(dim_x=1, n=64, box=2 * np.pi)
    assert grid.sobolev_norm_x(np.zeros(grid.shape), 2) == 0.0
    f = np.sin(grid.x[0].ravel())
    val = grid.sobolev_norm_x(f, 1)
    assert val == pytest.approx(2 * np.sqrt(np.pi), rel=1e-12)


def test_integral_zero_mean_mode():
    grid = Grid(dim_x=1, n=64)
    f = np.cos(grid.x[0].ravel())
    assert abs(grid.integral(f)) <= 1e-12


def test_parseval():
    rng = np.random.default_rng(5)
    grid = Grid(dim_x=1, n=64)
    f = grid.dealias(rng.standard_normal(grid.shape))
    phys = float(grid.l2sq(f))
    F = np.fft.rfft(f)
    spec = (abs(F[0]) ** 2 + 2 * np.sum(abs(F[1:-1]) ** 2) + abs(F[-1]) ** 2) / 64**2 * grid.volume
    assert abs(phys - spec) <= 1e-10 * max(1.0, phys)


def test_derivative_kills_means():
    rng = np.random.default_rng(6)
    grid = Grid(dim_x=2, n=32)
    f = grid.dealias(rng.standard_normal(grid.shape))
    for alpha in ((1, 0), (0, 1), (2, 1)):
        assert abs(grid.integral(grid.derivative(f, alpha, max_order=3))) <= 1e-13


def test_multi_indices_enumeration():
    idx = multi_indices(2, 2)
    assert (0, 0) in idx and (2, 0) in idx and (1, 1) in idx
    assert all(sum(a) <= 2 for a in idx)
    assert len(multi_indices(1, 4)) == 5
    assert multi_indices(1, 4, min_order=1) == [(1,), (2,), (3,), (4,)]
