"""Velocity-space algebra in the Gaussian-weighted orthonormal Hermite basis.

Per axis the basis functions are

    psi_k(v) = He_k(v) * exp(-v^2/4) / ((2*pi)^(1/4) * sqrt(k!)),

with He_k the probabilists' Hermite polynomials; in D dimensions the basis is
the tensor product indexed by multi-indices k, 0 <= k_a < order, flattened in
C order (last axis fastest).  Writing G(v) for the unit Gaussian, psi_0 =
sqrt(G) and the first-moment modes are v_a*sqrt(G) = psi_{e_a}, so the mass
and momentum moments of a coefficient vector are literally its k = 0 and
k = e_a entries.

The linearized drift-diffusion collision operator
(1/sqrt(G)) div_v [ G grad_v (f / sqrt(G)) ] is exactly diagonal here with
eigenvalue -|k|.  The banded ladder actions per axis a are

    lower     = (d/dv_a + v_a/2):  psi_k ->  sqrt(k_a)     psi_{k - e_a}
    raise_neg = (d/dv_a - v_a/2):  psi_k -> -sqrt(k_a + 1) psi_{k + e_a}
    mult_v    = (v_a *)         :  psi_k ->  sqrt(k_a + 1) psi_{k + e_a}
                                           + sqrt(k_a)     psi_{k - e_a}
    d_v       = (lower + raise_neg) / 2.

Coefficients pushed past the truncation are dropped; every ladder call reports
the squared mass it dropped so conservation audits can separate scheme error
from truncation error.

Quadrature is Gauss-Hermite under the weight exp(-v^2/2): Q nodes per axis
integrate poly * exp(-v^2/2) exactly up to polynomial degree 2Q - 1, which
makes analysis/synthesis an exact round trip on resolved modes for
Q >= order + 2.

All operations are pure functions of immutable inputs; inner products reduce
in a fixed serial order, so serial runs are bit-reproducible.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .errors import ConfigurationError, DimensionError, ShapeError

LADDER_KINDS = ("lower", "raise_neg", "mult_v", "d_v")


@dataclass(frozen=True)
class BasisSpec:
    """Truncation parameters for the velocity basis."""

    dim: int
    order: int
    quad_size: int | None = None

    def __post_init__(self):
        if self.quad_size is None:
            object.__setattr__(self, "quad_size", self.order + 2)
        if self.dim not in (1, 2, 3):
            raise ConfigurationError(f"velocity dim must be 1, 2 or 3, got {self.dim}")
        if self.order < 4:
            raise ConfigurationError(
                f"order must be >= 4 so the momentum and second-moment modes exist, got {self.order}"
            )
        if self.quad_size < self.order + 2:
            raise ConfigurationError(
                f"quad_size must be >= order + 2 = {self.order + 2}, got {self.quad_size}"
            )

    @property
    def n_modes(self) -> int:
        return self.order**self.dim

    @property
    def n_nodes(self) -> int:
        return self.quad_size**self.dim


@dataclass(frozen=True)
class VelocityCoeffs:
    """Coefficients of one velocity-space function; ``leakage`` records the
    squared mass dropped past the truncation by the operation that produced it."""

    spec: BasisSpec
    c: np.ndarray
    leakage: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.shape != (self.spec.n_modes,):
            raise ShapeError(f"expected {self.spec.n_modes} coefficients, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ShapeError("coefficients must be finite")
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class QuadratureTable:
    """Tensor Gauss-Hermite nodes/weights plus the basis evaluated at them."""

    spec: BasisSpec
    nodes: np.ndarray        # (Q^D, D)
    weights: np.ndarray      # (Q^D,)
    psi_values: np.ndarray   # (Q^D, K)


def hermite_polynomials(order: int, v: np.ndarray) -> np.ndarray:
    """Normalized probabilists' Hermite polynomials He_k(v)/sqrt(k!) for
    k < order at arbitrary 1-D points, shape (order, len(v)).  These are the
    basis functions divided by sqrt(G): psi_k = h_k * sqrt(G)."""
    v = np.asarray(v, dtype=float)
    h = np.empty((order, v.size))
    h[0] = 1.0
    if order > 1:
        h[1] = v
    for k in range(1, order - 1):
        h[k + 1] = (v * h[k] - np.sqrt(k) * h[k - 1]) / np.sqrt(k + 1.0)
    return h


def hermite_functions(order: int, v: np.ndarray) -> np.ndarray:
    """Table psi_k(v) for k < order at arbitrary 1-D points v, shape (order, len(v))."""
    v = np.asarray(v, dtype=float)
    h = hermite_polynomials(order, v)
    return h * ((2.0 * np.pi) ** -0.25 * np.exp(-(v**2) / 4.0))


def psi_at(spec: BasisSpec, points: np.ndarray) -> np.ndarray:
    """Evaluate all tensor basis functions at points of shape (m, D) -> (m, K)."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    axis_tables = [hermite_functions(spec.order, pts[:, a]) for a in range(spec.dim)]
    out = np.ones((pts.shape[0], 1))
    for a in range(spec.dim):
        out = (out[:, :, None] * axis_tables[a].T[:, None, :]).reshape(pts.shape[0], -1)
    return out


class HermiteBasis:
    """Precomputed ladder/quadrature machinery for one :class:`BasisSpec`.

    Array-level methods act on coefficient arrays of shape (..., K) with any
    batch prefix (e.g. spatial grids) and return ``(out, leak)`` where ``leak``
    is the total squared coefficient mass dropped past the truncation.
    """

    def __init__(self, spec: BasisSpec):
        self.spec = spec
        N, D = spec.order, spec.dim
        self.k_multi = np.array(list(itertools.product(range(N), repeat=D)), dtype=int)
        self.degree = self.k_multi.sum(axis=1)
        self.idx_zero = 0
        eye = np.eye(D, dtype=int)
        self.idx_e = np.array([self._flat(eye[a]) for a in range(D)])
        self.idx_2e = np.array([self._flat(2 * eye[a]) for a in range(D)])
        self.idx_ee = {}
        for i in range(D):
            for j in range(D):
                if i != j:
                    self.idx_ee[(i, j)] = self._flat(eye[i] + eye[j])
        self._sq = np.sqrt(np.arange(N + 2, dtype=float))
        self.quad = self._build_quadrature()
        self._nu_mat = None

    def _flat(self, k) -> int:
        return int(np.ravel_multi_index(tuple(int(x) for x in k), (self.spec.order,) * self.spec.dim))

    # -- banded ladder actions ---------------------------------------------

    def _modes_view(self, arr: np.ndarray) -> np.ndarray:
        K = self.spec.n_modes
        if arr.shape[-1] != K:
            raise ShapeError(f"expected trailing coefficient axis of length {K}, got {arr.shape}")
        return arr.reshape(arr.shape[:-1] + (self.spec.order,) * self.spec.dim)

    def _check_axis(self, axis: int):
        if not 0 <= axis < self.spec.dim:
            raise DimensionError(f"axis {axis} out of range for velocity dim {self.spec.dim}")

    @staticmethod
    def _sl(ndim: int, ax: int, s) -> tuple:
        idx = [slice(None)] * ndim
        idx[ax] = s
        return tuple(idx)

    def _band(self, arr: np.ndarray, axis: int, up: float, down: float,
              order: int | None = None):
        """out_j = up * sqrt(j+1) c_{j+e} + down * sqrt(j) c_{j-e} along one axis.

        ``up`` weights the lowering band (coefficients moving down-index), and
        ``down`` the raising band; mass raised past the top slot is dropped and
        its squared magnitude returned.
        """
        self._check_axis(axis)
        N = self.spec.order if order is None else order
        r = arr.reshape(arr.shape[: -1] + (N,) * self.spec.dim) if order else self._modes_view(arr)
        nd = r.ndim
        ax = nd - self.spec.dim + axis
        out = np.zeros_like(r)
        sq = self._sq
        if up != 0.0:
            f = (up * sq[1:N]).reshape(self._bshape(nd, ax, N - 1))
            out[self._sl(nd, ax, slice(0, N - 1))] += f * r[self._sl(nd, ax, slice(1, N))]
        leak = 0.0
        if down != 0.0:
            f = (down * sq[1:N]).reshape(self._bshape(nd, ax, N - 1))
            out[self._sl(nd, ax, slice(1, N))] += f * r[self._sl(nd, ax, slice(0, N - 1))]
            top = down * sq[N] * r[self._sl(nd, ax, N - 1)]
            leak = float(np.sum(top * top))
        return out.reshape(arr.shape), leak

    @staticmethod
    def _bshape(ndim: int, ax: int, size: int) -> tuple:
        return (1,) * ax + (size,) + (1,) * (ndim - ax - 1)

    def lower(self, arr, axis):
        return self._band(arr, axis, up=1.0, down=0.0)

    def raise_neg(self, arr, axis):
        return self._band(arr, axis, up=0.0, down=-1.0)

    def mult_v(self, arr, axis):
        return self._band(arr, axis, up=1.0, down=1.0)

    def d_v(self, arr, axis):
        return self._band(arr, axis, up=0.5, down=-0.5)

    def ladder(self, arr, kind: str, axis: int):
        if kind not in LADDER_KINDS:
            raise ConfigurationError(f"unknown ladder kind {kind!r}; expected one of {LADDER_KINDS}")
        return getattr(self, kind)(arr, axis)

    # -- diagonal operator, projections, moments ----------------------------

    def apply_L(self, arr: np.ndarray) -> np.ndarray:
        """Collision operator: exactly diagonal, out_k = -|k| c_k."""
        if arr.shape[-1] != self.spec.n_modes:
            raise ShapeError(f"expected trailing axis {self.spec.n_modes}, got {arr.shape}")
        return arr * (-self.degree.astype(float))

    def project(self, arr: np.ndarray, which: str) -> np.ndarray:
        keep_p = np.concatenate(([self.idx_zero], self.idx_e))
        out = np.zeros_like(arr)
        if which == "P0":
            out[..., self.idx_zero] = arr[..., self.idx_zero]
        elif which == "P1":
            out[..., self.idx_e] = arr[..., self.idx_e]
        elif which == "P":
            out[..., keep_p] = arr[..., keep_p]
        elif which == "IminusP":
            out = np.array(arr, copy=True)
            out[..., keep_p] = 0.0
        else:
            raise ConfigurationError(f"unknown projection {which!r}")
        return out

    def moments(self, arr: np.ndarray):
        """Mass and momentum moments: (c_0, c_{e_a} per axis)."""
        return arr[..., self.idx_zero], np.moveaxis(arr[..., self.idx_e], -1, 0)

    def gamma(self, arr: np.ndarray, i: int, j: int, convention: str = "constant"):
        """Second-moment functional <(v_i v_j - 1) sqrt(G), .>.

        The defining pairing subtracts the constant 1 for every (i, j); on the
        diagonal the subtraction cancels the psi_0 component of v_i^2 sqrt(G)
        exactly, and off-diagonal it contributes -c_0.  ``convention=
        "kronecker"`` subtracts delta_ij instead (no -c_0 off the diagonal).
        """
        self._check_axis(i)
        self._check_axis(j)
        if convention not in ("constant", "kronecker"):
            raise ConfigurationError(f"unknown gamma convention {convention!r}")
        if i == j:
            return np.sqrt(2.0) * arr[..., self.idx_2e[i]]
        out = np.array(arr[..., self.idx_ee[(i, j)]], copy=True)
        if convention == "constant":
            out = out - arr[..., self.idx_zero]
        return out

    # -- weighted inner product ---------------------------------------------

    def _extended(self, arr: np.ndarray) -> np.ndarray:
        """Embed coefficients into a one-order-larger basis (exact headroom
        for a single ladder application)."""
        N, D = self.spec.order, self.spec.dim
        r = self._modes_view(arr)
        ext = np.zeros(r.shape[: -D] + (N + 1,) * D)
        ext[(Ellipsis,) + (slice(0, N),) * D] = r
        return ext.reshape(arr.shape[:-1] + ((N + 1) ** D,))

    def nu_inner(self, g: np.ndarray, h: np.ndarray):
        """Dissipation inner product int grad_v g . grad_v h + (1+|v|^2) g h dv,
        evaluated exactly in coefficient space (no quadrature)."""
        if g.shape[-1] != h.shape[-1]:
            raise ShapeError("nu_inner operands have mismatched coefficient counts")
        N1 = self.spec.order + 1
        ge, he = self._extended(g), self._extended(h)
        acc = np.einsum("...k,...k->...", g, h)
        for a in range(self.spec.dim):
            dg, _ = self._band(ge, a, up=0.5, down=-0.5, order=N1)
            dh, _ = self._band(he, a, up=0.5, down=-0.5, order=N1)
            vg, _ = self._band(ge, a, up=1.0, down=1.0, order=N1)
            vh, _ = self._band(he, a, up=1.0, down=1.0, order=N1)
            acc = acc + np.einsum("...k,...k->...", dg, dh) + np.einsum("...k,...k->...", vg, vh)
        return acc

    def nu_matrix(self) -> np.ndarray:
        """Gram matrix B with g^T B h = nu_inner(g, h); symmetric positive definite."""
        if self._nu_mat is None:
            K = self.spec.n_modes
            B = self.nu_inner(np.eye(K)[:, None, :], np.eye(K)[None, :, :])
            self._nu_mat = 0.5 * (B + B.T)
        return self._nu_mat

    # -- quadrature, synthesis, analysis -------------------------------------

    def _build_quadrature(self) -> QuadratureTable:
        Q, D = self.spec.quad_size, self.spec.dim
        x, w = np.polynomial.hermite.hermgauss(Q)
        v1 = x * np.sqrt(2.0)
        # weights for plain dv integrals of (polynomial) * exp(-v^2/2) integrands
        w1 = w * np.sqrt(2.0) * np.exp(v1**2 / 2.0)
        self._axis_nodes = v1
        self._axis_weights = w1
        self._axis_psi = hermite_functions(self.spec.order, v1)   # (N, Q)
        # Gaussian-measure companions: int G(v) p(v) dv = sum wg_q p(v_q),
        # exact for polynomial p of degree <= 2Q-1; h-table holds psi_k/sqrt(G)
        self._axis_wgauss = w / np.sqrt(np.pi)
        self._axis_h = hermite_polynomials(self.spec.order, v1)   # (N, Q)
        nodes = np.array(list(itertools.product(v1, repeat=D)))
        weights = np.ones(1)
        for _ in range(D):
            weights = np.multiply.outer(weights, w1).reshape(-1)
        psi_values = psi_at(self.spec, nodes)
        return QuadratureTable(self.spec, nodes, weights, psi_values)

    def synthesize(self, arr: np.ndarray) -> np.ndarray:
        """Point values at the tensor quadrature nodes: (..., K) -> (..., Q^D)."""
        D = self.spec.dim
        r = self._modes_view(arr)
        bn = r.ndim - D
        for _ in range(D):
            r = np.tensordot(r, self._axis_psi, axes=([bn], [0]))
        return r.reshape(arr.shape[:-1] + (self.spec.n_nodes,))

    def analyze(self, values: np.ndarray) -> np.ndarray:
        """Weighted projection of node values back onto the resolved modes."""
        D, Q = self.spec.dim, self.spec.quad_size
        if values.shape[-1] != self.spec.n_nodes:
            raise ShapeError(f"expected trailing node axis {self.spec.n_nodes}, got {values.shape}")
        r = values.reshape(values.shape[:-1] + (Q,) * D)
        bn = r.ndim - D
        pw = self._axis_psi * self._axis_weights[None, :]
        for _ in range(D):
            r = np.tensordot(r, pw, axes=([bn], [1]))
        return r.reshape(values.shape[:-1] + (self.spec.n_modes,))

    def maxwellian_at_nodes(self) -> np.ndarray:
        """G(v_q) at the quadrature nodes (the square of the psi_0 row)."""
        return self.quad.psi_values[:, self.idx_zero] ** 2

    def gauss_weights(self) -> np.ndarray:
        """Tensor quadrature weights for the Gaussian measure G(v) dv."""
        D = self.spec.dim
        wg = np.ones(1)
        for _ in range(D):
            wg = np.multiply.outer(wg, self._axis_wgauss).reshape(-1)
        return wg

    def poly_synthesize(self, arr: np.ndarray) -> np.ndarray:
        """Values of f/sqrt(G) = sum_k c_k h_k(v) at the quadrature nodes.

        The Gaussian factor is divided out analytically, so integrands built
        from these values pair with :meth:`gauss_weights` in the quadrature's
        polynomial exactness class.
        """
        D = self.spec.dim
        r = self._modes_view(arr)
        bn = r.ndim - D
        for _ in range(D):
            r = np.tensordot(r, self._axis_h, axes=([bn], [0]))
        return r.reshape(arr.shape[:-1] + (self.spec.n_nodes,))


@lru_cache(maxsize=32)
def build_basis(spec: BasisSpec) -> HermiteBasis:
    """Build (and cache) the ladder tables and quadrature for one spec.

    The returned object's ``quad`` table satisfies the orthonormality
    invariant sum_q w_q psi_k psi_j = delta_kj to 1e-12 on all resolved modes.
    """
    return HermiteBasis(spec)


# -- coefficient-level operation surface -------------------------------------


def _basis_of(g: VelocityCoeffs) -> HermiteBasis:
    return build_basis(g.spec)


def apply_L(g: VelocityCoeffs) -> VelocityCoeffs:
    return VelocityCoeffs(g.spec, _basis_of(g).apply_L(g.c))


def apply_ladder(g: VelocityCoeffs, kind: str, axis: int) -> VelocityCoeffs:
    out, leak = _basis_of(g).ladder(g.c, kind, axis)
    return VelocityCoeffs(g.spec, out, leakage=leak)


def moments(g: VelocityCoeffs):
    a, b = _basis_of(g).moments(g.c)
    return float(a), np.asarray(b, dtype=float)


def gamma(g: VelocityCoeffs, i: int, j: int, convention: str = "constant") -> float:
    return float(_basis_of(g).gamma(g.c, i, j, convention=convention))


def project(g: VelocityCoeffs, which: str) -> VelocityCoeffs:
    return VelocityCoeffs(g.spec, _basis_of(g).project(g.c, which))


def nu_inner(g: VelocityCoeffs, h: VelocityCoeffs) -> float:
    if g.spec != h.spec:
        raise ShapeError("nu_inner operands built on different specs")
    return float(_basis_of(g).nu_inner(g.c, h.c))


def synthesize(g: VelocityCoeffs) -> np.ndarray:
    return _basis_of(g).synthesize(g.c)


def analyze(values: np.ndarray, spec: BasisSpec) -> VelocityCoeffs:
    return VelocityCoeffs(spec, build_basis(spec).analyze(np.asarray(values, dtype=float)))


def coercivity_probe(spec: BasisSpec, mode: str = "eigensolve",
                     samples: int = 1000, seed: int = 0):
    """Smallest restricted Rayleigh quotient <-L g, g> / nu(g, g) over g with
    zero mass mode.

    ``eigensolve`` computes the exact minimum for the truncated basis via a
    generalized symmetric eigenproblem; ``random`` samples the quotient.
    Returns ``(lambda0_emp, description)``.
    """
    basis = build_basis(spec)
    K = spec.n_modes
    sub = np.arange(1, K)   # all modes with the mass coordinate removed
    if sub.size == 0:
        raise ConfigurationError("basis has no modes beyond k = 0")
    A = np.diag(basis.degree[sub].astype(float))
    B = basis.nu_matrix()[np.ix_(sub, sub)]
    if mode == "eigensolve":
        vals, vecs = scipy.linalg.eigh(A, B)
        lam = float(vals[0])
        vec = vecs[:, 0]
        weights = vec**2 / np.sum(vec**2)
        top = np.argsort(weights)[::-1][:4]
        desc = {
            "mode": "eigensolve",
            "argmin_modes": [
                (tuple(int(x) for x in basis.k_multi[sub[t]]), float(weights[t]))
                for t in top
            ],
        }
        return lam, desc
    if mode == "random":
        rng = np.random.Generator(np.random.PCG64(seed))
        g = rng.standard_normal((samples, sub.size))
        num = np.einsum("sk,k,sk->s", g, basis.degree[sub].astype(float), g)
        den = np.einsum("sk,kl,sl->s", g, B, g)
        q = num / den
        i = int(np.argmin(q))
        return float(q[i]), {"mode": "random", "samples": samples, "argmin_sample": i}
    raise ConfigurationError(f"unknown probe mode {mode!r}")
