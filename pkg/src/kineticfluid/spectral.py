"""Periodic spatial discretization: spectral derivatives, dealiased products, norms.

Fields are real arrays sampled on a uniform grid over [0, L)^d.  The spatial
axes always come first; trailing axes (vector components stored per-call, or
Hermite coefficient columns) are carried along untouched, so the same routines
serve scalar fields, each component of a vector field, and whole kinetic
coefficient arrays.

Nonlinear terms are evaluated pseudo-spectrally with a 2/3-rule truncation:
modes with any |k_int| > (n - 1)//3 are zeroed.  With that band, the product
of two in-band fields is alias-free on the kept band, and spatial integrals
(mode zero) of products of up to three in-band fields are alias-exact.

Sobolev norms default to the sum-of-L2-norms convention

    ||g||_{H^s} = sum_{|alpha| <= s} ||d^alpha g||_{L^2};

the squared variant sum ||d^alpha g||^2 (pass ``squared=True``) is what the
energy functionals are built from.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigurationError, OrderError, ShapeError


def multi_indices(dim: int, max_order: int, min_order: int = 0):
    """All spatial multi-indices alpha with min_order <= |alpha| <= max_order."""
    out = []
    for alpha in itertools.product(range(max_order + 1), repeat=dim):
        if min_order <= sum(alpha) <= max_order:
            out.append(alpha)
    return out


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid, n points per axis on [0, box)^dim_x."""

    dim_x: int
    n: int
    box: float = 2.0 * np.pi
    max_deriv_order: int = 4

    def __post_init__(self):
        if self.dim_x not in (1, 2, 3):
            raise ConfigurationError(f"dim_x must be 1, 2 or 3, got {self.dim_x}")
        if self.n < 16 or self.n % 2 != 0:
            raise ConfigurationError(f"n must be even and >= 16, got {self.n}")
        if not self.box > 0:
            raise ConfigurationError(f"box length must be positive, got {self.box}")

    # -- geometry ---------------------------------------------------------

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim_x

    @property
    def volume(self) -> float:
        return self.box**self.dim_x

    @cached_property
    def x(self) -> list:
        """Coordinate arrays, one per axis, each broadcastable to ``shape``."""
        x1 = np.arange(self.n) * (self.box / self.n)
        return [
            x1.reshape((1,) * a + (self.n,) + (1,) * (self.dim_x - a - 1))
            for a in range(self.dim_x)
        ]

    @cached_property
    def _kint(self) -> list:
        """Integer wavenumbers per axis in transform layout (rfft on last axis)."""
        full = np.fft.fftfreq(self.n, 1.0 / self.n)
        r = np.arange(self.n // 2 + 1, dtype=float)
        return [full.copy() for _ in range(self.dim_x - 1)] + [r]

    @cached_property
    def kmax_keep(self) -> int:
        # Largest band with 3*k < n: quadratic products of kept modes cannot
        # alias back into the kept band.
        return (self.n - 1) // 3

    @cached_property
    def _mask(self) -> np.ndarray:
        m = np.ones(self._spec_shape, dtype=bool)
        for a, k in enumerate(self._kint):
            keep = np.abs(k) <= self.kmax_keep
            m &= keep.reshape(self._axis_shape(a, k.size, self.dim_x))
        return m

    @property
    def _spec_shape(self) -> tuple:
        return (self.n,) * (self.dim_x - 1) + (self.n // 2 + 1,)

    @staticmethod
    def _axis_shape(axis: int, size: int, ndim: int) -> tuple:
        return (1,) * axis + (size,) + (1,) * (ndim - axis - 1)

    # -- transforms -------------------------------------------------------

    def _axes(self, f: np.ndarray) -> tuple:
        if f.ndim < self.dim_x or f.shape[: self.dim_x] != self.shape:
            raise ShapeError(
                f"field shape {f.shape} does not start with grid shape {self.shape}"
            )
        return tuple(range(self.dim_x))

    def fft(self, f: np.ndarray) -> np.ndarray:
        return np.fft.rfftn(f, axes=self._axes(f))

    def ifft(self, F: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(F, s=self.shape, axes=tuple(range(self.dim_x)))

    def _spec_factor(self, a: int, values: np.ndarray, ndim: int) -> np.ndarray:
        return values.reshape(self._axis_shape(a, values.size, ndim))

    # -- operations -------------------------------------------------------

    def derivative(self, f: np.ndarray, alpha, max_order: int | None = None) -> np.ndarray:
        """Spectral derivative d^alpha of the trigonometric interpolant."""
        alpha = tuple(int(m) for m in alpha)
        if len(alpha) != self.dim_x or any(m < 0 for m in alpha):
            raise ConfigurationError(f"bad spatial multi-index {alpha} for dim {self.dim_x}")
        cap = self.max_deriv_order if max_order is None else max_order
        if sum(alpha) > cap:
            raise OrderError(f"|alpha| = {sum(alpha)} exceeds derivative cap {cap}")
        if sum(alpha) == 0:
            return np.array(f, copy=True)
        F = self.fft(f)
        scale = 2.0 * np.pi / self.box
        for a, m in enumerate(alpha):
            if m:
                F = F * self._spec_factor(a, (1j * scale * self._kint[a]) ** m, F.ndim)
        return self.ifft(F)

    def grad(self, f: np.ndarray, max_order: int | None = None) -> list:
        e = [0] * self.dim_x
        out = []
        for a in range(self.dim_x):
            e[a] = 1
            out.append(self.derivative(f, e, max_order=max_order))
            e[a] = 0
        return out

    def laplacian(self, f: np.ndarray) -> np.ndarray:
        F = self.fft(f)
        scale = 2.0 * np.pi / self.box
        ksq = np.zeros(self._spec_shape)
        for a, k in enumerate(self._kint):
            ksq = ksq + self._spec_factor(a, (scale * k) ** 2, len(self._spec_shape))
        return self.ifft(F * ksq.reshape(ksq.shape + (1,) * (F.ndim - ksq.ndim)) * (-1.0))

    def dealias(self, f: np.ndarray) -> np.ndarray:
        F = self.fft(f)
        mask = self._mask.reshape(self._mask.shape + (1,) * (F.ndim - self._mask.ndim))
        return self.ifft(F * mask)

    def product(self, *fields: np.ndarray) -> np.ndarray:
        """Pointwise product followed by 2/3-rule truncation."""
        if not fields:
            raise ShapeError("product needs at least one field")
        out = fields[0]
        for f in fields[1:]:
            if f.shape[: self.dim_x] != self.shape or out.shape[: self.dim_x] != self.shape:
                raise ShapeError("product operands live on mismatched grids")
            out = out * f
        return self.dealias(out)

    def integral(self, f: np.ndarray):
        """Integral over the torus (exact for band-limited fields)."""
        return f.mean(axis=self._axes(f)) * self.volume

    def l2sq(self, f: np.ndarray):
        """Squared L2 norm over the spatial domain (trailing axes preserved)."""
        return self.integral(f * f)

    def sobolev_norm_x(self, f: np.ndarray, s: int, squared: bool = False,
                       max_order: int | None = None) -> float:
        """H^s norm, sum-of-norms convention; ``squared=True`` sums squares."""
        cap = self.max_deriv_order if max_order is None else max_order
        if s > cap:
            raise OrderError(f"s = {s} exceeds derivative cap {cap}")
        total = 0.0
        for alpha in multi_indices(self.dim_x, s):
            val = float(np.sum(self.l2sq(self.derivative(f, alpha, max_order=cap))))
            total += val if squared else np.sqrt(val)
        return total
