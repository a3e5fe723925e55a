"""Diagnostic functionals: the layered energy/dissipation quantities, the
conserved integrals, the nonlinear entropy balance, the macroscopic moment
residuals, the torus zero-mean checks, and decay-rate fitting.

Conventions.  All quadratic functionals below use the squared-sum Sobolev
variant (sum of squared L2 norms of derivatives); the sum-of-norms
value itself is available through ``Grid.sobolev_norm_x`` /
:func:`mixed_sobolev_norm` with ``squared=False``.  Writing w = (I-P)f for
the micro part, a/b for the moments of f, and nu(.) for the dissipation
quadratic form, the ladder is

    E0 = sum_{|a|<=3} sum_ij int d^a(d_j b_i + d_i b_j) d^a Gamma_ij(w) dx
         - sum_{|a|<=3} int d^a a d^a div b dx
    E1 = ||f||^2 + ||rho||^2 + ||u||^2
         + sum_{1<=|a|<=4} ( ||d^a f||^2 + ||W_rho d^a rho||^2 + ||d^a u||^2 )
         + tau1 E0 + tau2 sum_{|a|<=3} int d^a u . d^a grad rho dx,
             W_rho = sqrt(p'(1+rho)) / (1+rho)
    D1 = ||grad(a,b,rho,u)||^2_{H3} + ||b-u||^2_{H4}
         + sum_{|a|<=4} ( nu(d^a w) + ||d^a grad u||^2 )
    E2 = sum_{1<=k<=4} C_k sum_{|beta|=k, |a|+|beta|<=4} ||d^a_beta w||^2
    D2 = sum_{1<=|beta|<=4, |a|+|beta|<=4} nu(d^a_beta w)
    E  = E1 + tau3 E2          D  = D1 + tau3 D2
    DT1 = D1 + tau4 (||a||^2 + ||rho||^2) + tau5 ||b+u||^2
    DT  = DT1 + tau3 D2.

The derivative-order cap defaults to 4 and auto-reduces (with a warning) on
grids too coarse to resolve fourth derivatives meaningfully (n < 32).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import ModelParams, SimState, positivity_min
from .errors import (
    ConfigurationError,
    DomainError,
    EntropyDomainError,
    OrderError,
    StateError,
)
from .hermite import HermiteBasis
from .spectral import Grid, multi_indices


@dataclass(frozen=True)
class FunctionalWeights:
    """Coupling weights for the layered functionals.

    The defaults keep every cross term small against the plain quadratic core
    so positivity cannot break near equilibrium; :func:`validate_weights`
    makes the choice falsifiable against a random-state battery.
    """

    tau1: float = 0.01
    tau2: float = 0.01
    tau3: float = 1.0
    tau4: float = 0.01
    tau5: float = 0.01
    ck: tuple = (0.25, 0.0625, 0.015625, 0.00390625)   # C_k = 4^-k, k = 1..4
    s_cap: int = 4

    def __post_init__(self):
        for name in ("tau1", "tau2", "tau3", "tau4", "tau5"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if len(self.ck) != 4 or any(c <= 0 for c in self.ck):
            raise ConfigurationError("ck must hold four positive constants")
        if not 1 <= self.s_cap <= 4:
            raise ConfigurationError("s_cap must lie in 1..4")

    @classmethod
    def default(cls) -> "FunctionalWeights":
        return cls()


def effective_cap(grid: Grid, s_cap: int) -> int:
    """Reduce the derivative-order cap on coarse grids (with a warning)."""
    if grid.n < 32 and s_cap > 3:
        warnings.warn(
            f"grid n = {grid.n} < 32 cannot resolve order-4 derivatives; "
            "reducing the functional cap to 3",
            stacklevel=2,
        )
        return 3
    return s_cap


# -- low-level norm helpers ---------------------------------------------------


def _l2sq_scalar(grid: Grid, f: np.ndarray) -> float:
    return float(np.sum(grid.l2sq(f)))


def _nusq(grid: Grid, basis: HermiteBasis, farr: np.ndarray) -> float:
    """int_x nu(f(x,.), f(x,.)) dx via the exact coefficient-space Gram form."""
    B = basis.nu_matrix()
    dens = np.einsum("...k,kl,...l->...", farr, B, farr)
    return float(grid.integral(dens))


def _v_derivative(basis: HermiteBasis, farr: np.ndarray, beta) -> np.ndarray:
    out = farr
    for a, m in enumerate(beta):
        for _ in range(m):
            out, _ = basis.d_v(out, a)
    return out


def mixed_sobolev_norm(state_or_arr, grid: Grid = None, basis: HermiteBasis = None,
                       s: int = 4, squared: bool = False) -> float:
    """Mixed-derivative Sobolev norm of a kinetic coefficient array:
    sum over |alpha| + |beta| <= s of the L2 norms of d^alpha_beta f."""
    if isinstance(state_or_arr, SimState):
        grid, basis, farr = state_or_arr.grid, state_or_arr.basis, state_or_arr.f
    else:
        farr = state_or_arr
    if grid is None or basis is None:
        raise ConfigurationError("mixed_sobolev_norm needs grid and basis")
    cap = effective_cap(grid, s)
    if s > 4:
        raise OrderError(f"s = {s} exceeds the supported cap 4")
    total = 0.0
    for beta in multi_indices(basis.spec.dim, cap):
        fb = _v_derivative(basis, farr, beta)
        for alpha in multi_indices(grid.dim_x, cap - sum(beta)):
            val = float(np.sum(grid.l2sq(grid.derivative(fb, alpha, max_order=cap))))
            total += val if squared else np.sqrt(val)
    return total


# -- moment fields ------------------------------------------------------------


def _moment_fields(state: SimState):
    a, b = state.basis.moments(state.f)
    return a, b


def _gamma_fields(state: SimState, w: np.ndarray, convention: str):
    """Gamma_ij(w) as spatial fields, all (i, j) pairs, dict keyed by (i, j)."""
    D = state.grid.dim_x
    return {
        (i, j): state.basis.gamma(w, i, j, convention=convention)
        for i in range(D)
        for j in range(D)
    }


# -- energy ladder ------------------------------------------------------------


def energy_E0(state: SimState, convention: str = "constant", s_cap: int = 4) -> float:
    grid, basis = state.grid, state.basis
    cap = effective_cap(grid, s_cap)
    amax = min(3, cap - 1)
    a_f, b_f = _moment_fields(state)
    w = basis.project(state.f, "IminusP")
    gam = _gamma_fields(state, w, convention)
    D = grid.dim_x
    e = [tuple(1 if c == a else 0 for c in range(D)) for a in range(D)]
    total = 0.0
    div_b = np.zeros_like(a_f)
    for a in range(D):
        div_b += grid.derivative(b_f[a], e[a], max_order=cap)
    for alpha in multi_indices(D, amax):
        for i in range(D):
            for j in range(D):
                sym = grid.derivative(b_f[i], e[j], max_order=cap) \
                    + grid.derivative(b_f[j], e[i], max_order=cap)
                total += float(grid.integral(
                    grid.derivative(sym, alpha, max_order=cap)
                    * grid.derivative(gam[(i, j)], alpha, max_order=cap)
                ))
        total -= float(grid.integral(
            grid.derivative(a_f, alpha, max_order=cap)
            * grid.derivative(div_b, alpha, max_order=cap)
        ))
    return total


def energy_E1_D1(state: SimState, params: ModelParams,
                 weights: FunctionalWeights, convention: str = "constant"):
    grid, basis = state.grid, state.basis
    cap = effective_cap(grid, weights.s_cap)
    D = grid.dim_x
    e = [tuple(1 if c == a else 0 for c in range(D)) for a in range(D)]
    f, rho, u = state.f, state.rho, state.u
    one_rho = 1.0 + rho
    if one_rho.min() <= 0:
        raise StateError("vacuum breach in the density weight of the energy")
    a_f, b_f = _moment_fields(state)
    w = basis.project(f, "IminusP")

    # E1
    e1 = float(np.sum(grid.l2sq(f))) + _l2sq_scalar(grid, rho)
    e1 += sum(_l2sq_scalar(grid, u[i]) for i in range(D))
    w_rho = np.sqrt(params.pprime(one_rho)) / one_rho
    for alpha in multi_indices(D, cap, min_order=1):
        e1 += float(np.sum(grid.l2sq(grid.derivative(f, alpha, max_order=cap))))
        e1 += _l2sq_scalar(grid, w_rho * grid.derivative(rho, alpha, max_order=cap))
        for i in range(D):
            e1 += _l2sq_scalar(grid, grid.derivative(u[i], alpha, max_order=cap))
    e0 = energy_E0(state, convention=convention, s_cap=cap)
    e1 += weights.tau1 * e0
    cross = 0.0
    for alpha in multi_indices(D, min(3, cap - 1)):
        for i in range(D):
            cross += float(grid.integral(
                grid.derivative(u[i], alpha, max_order=cap)
                * grid.derivative(grid.derivative(rho, e[i], max_order=cap),
                                  alpha, max_order=cap + 1)
            ))
    e1 += weights.tau2 * cross

    # D1
    d1 = 0.0
    for alpha in multi_indices(D, min(3, cap - 1)):
        for a in range(D):
            for fld in (a_f, rho):
                d1 += _l2sq_scalar(grid, grid.derivative(
                    grid.derivative(fld, e[a], max_order=cap), alpha, max_order=cap + 1))
            for i in range(D):
                for fld in (b_f[i], u[i]):
                    d1 += _l2sq_scalar(grid, grid.derivative(
                        grid.derivative(fld, e[a], max_order=cap), alpha, max_order=cap + 1))
    for alpha in multi_indices(D, cap):
        for i in range(D):
            d1 += _l2sq_scalar(grid, grid.derivative(b_f[i] - u[i], alpha, max_order=cap))
        d1 += _nusq(grid, basis, grid.derivative(w, alpha, max_order=cap))
        for a in range(D):
            for i in range(D):
                d1 += _l2sq_scalar(grid, grid.derivative(
                    grid.derivative(u[i], e[a], max_order=cap + 1), alpha, max_order=cap + 1))
    return e1, d1, e0


def energy_E2_D2(state: SimState, weights: FunctionalWeights):
    grid, basis = state.grid, state.basis
    cap = effective_cap(grid, weights.s_cap)
    w = basis.project(state.f, "IminusP")
    e2 = 0.0
    d2 = 0.0
    for beta in multi_indices(basis.spec.dim, cap, min_order=1):
        k = sum(beta)
        wb = _v_derivative(basis, w, beta)
        for alpha in multi_indices(grid.dim_x, cap - k):
            wab = grid.derivative(wb, alpha, max_order=cap)
            e2 += weights.ck[k - 1] * float(np.sum(grid.l2sq(wab)))
            d2 += _nusq(grid, basis, wab)
    return e2, d2


def energy_total(state: SimState, params: ModelParams, weights: FunctionalWeights,
                 convention: str = "constant"):
    """Every functional of the ladder; returns a dict."""
    e1, d1, e0 = energy_E1_D1(state, params, weights, convention=convention)
    e2, d2 = energy_E2_D2(state, weights)
    a_f, b_f = _moment_fields(state)
    grid = state.grid
    dt1 = d1 + weights.tau4 * (_l2sq_scalar(grid, a_f) + _l2sq_scalar(grid, state.rho))
    dt1 += weights.tau5 * sum(
        _l2sq_scalar(grid, b_f[i] + state.u[i]) for i in range(grid.dim_x)
    )
    return {
        "E0": e0, "E1": e1, "D1": d1, "E2": e2, "D2": d2,
        "E": e1 + weights.tau3 * e2,
        "D": d1 + weights.tau3 * d2,
        "DT1": dt1,
        "DT": dt1 + weights.tau3 * d2,
    }


def plain_norm(state: SimState, s_cap: int = 4) -> float:
    """||f||^2_{H^s_{x,v}} + ||(rho, u)||^2_{H^s} in the squared-sum variant;
    the norm-equivalence partner of E."""
    grid = state.grid
    cap = effective_cap(grid, s_cap)
    total = mixed_sobolev_norm(state.f, grid, state.basis, s=cap, squared=True)
    total += grid.sobolev_norm_x(state.rho, cap, squared=True)
    for i in range(grid.dim_x):
        total += grid.sobolev_norm_x(state.u[i], cap, squared=True)
    return total


# -- conserved integrals and torus constraints --------------------------------


def conserved(state: SimState):
    """(mass_f, mass_rho, momentum): int a dx, int rho dx, int (1+rho) u + b dx."""
    grid = state.grid
    a_f, b_f = _moment_fields(state)
    mass_f = float(grid.integral(a_f))
    mass_rho = float(grid.integral(state.rho))
    momentum = np.array([
        float(grid.integral((1.0 + state.rho) * state.u[i] + b_f[i]))
        for i in range(grid.dim_x)
    ])
    return mass_f, mass_rho, momentum


def zero_mean_check(state: SimState):
    """(int a, int rho, int (b + (1+rho) u)) — the torus decay hypotheses."""
    mass_f, mass_rho, momentum = conserved(state)
    return mass_f, mass_rho, momentum


# -- entropy balance ----------------------------------------------------------


def _relative_deviation(state: SimState) -> np.ndarray:
    """g = f / sqrt(G) at all grid points x quadrature nodes, so the phase
    density is F = G (1 + g).  Working with g keeps every entropy integrand in
    the Gaussian-measure quadrature's polynomial exactness class through
    second order in the perturbation."""
    return state.basis.poly_synthesize(state.f)


def _require_positive_F(state: SimState, g: np.ndarray):
    m = 1.0 + g   # F / G
    if m.min() <= 0.0:
        flat = int(np.argmin(m.reshape(-1)))
        xi, qi = divmod(flat, m.shape[-1])
        xidx = np.unravel_index(xi, state.grid.shape)
        raise EntropyDomainError(
            f"F = G + sqrt(G) f is nonpositive (F/G min {m.min():.3e}) at grid "
            f"point {xidx}, node {qi}, t = {state.t}"
        )


def entropy_functional(state: SimState, params: ModelParams) -> float:
    """Free energy relative to equilibrium.

    The full functional is int n (|u|^2/2 + A(n)) dx + int int (F ln F +
    |v|^2 F / 2) dv dx; with F = G (1 + g) the kinetic integrand collapses to
    -(D/2) ln(2 pi) F + G (1+g) ln(1+g), and the state-independent constants
    are dropped so equilibrium sits at exactly zero.
    """
    grid, basis = state.grid, state.basis
    one_rho = 1.0 + state.rho
    usq = np.zeros_like(state.rho)
    for i in range(grid.dim_x):
        usq += state.u[i] ** 2
    fluid = float(grid.integral(one_rho * (0.5 * usq + params.pressure_potential(one_rho))))
    g = _relative_deviation(state)
    _require_positive_F(state, g)
    wg = basis.gauss_weights()
    c_m = 0.5 * basis.spec.dim * np.log(2.0 * np.pi)
    kin_density = ((1.0 + g) * np.log1p(g)) @ wg - c_m * state.f[..., basis.idx_zero]
    return fluid + float(grid.integral(kin_density))


def _midpoint_state(state: SimState, prev: SimState) -> SimState:
    return SimState(state.grid, state.basis,
                    0.5 * (state.f + prev.f),
                    0.5 * (state.rho + prev.rho),
                    0.5 * (state.u + prev.u),
                    0.5 * (state.t + prev.t))


def entropy_dissipation(state: SimState, params: ModelParams) -> float:
    """Kinetic dissipation -int int n |(v-u) F + grad_v F|^2 / F dv dx,
    nonpositive by construction; vanishes identically at equilibrium since
    grad_v G = -v G.  In relative variables the bracket is
    G [ -u (1+g) + grad_v g ], and grad_v g has exact in-basis coefficients
    (the lowering ladder)."""
    grid, basis = state.grid, state.basis
    g = _relative_deviation(state)
    _require_positive_F(state, g)
    acc = np.zeros(grid.shape + (basis.spec.n_nodes,))
    for a in range(grid.dim_x):
        low, _ = basis.lower(state.f, a)
        dg = basis.poly_synthesize(low)
        vec = -state.u[a][..., None] * (1.0 + g) + dg
        acc += vec * vec
    wg = basis.gauss_weights()
    integrand = acc / (1.0 + g)
    return -float(grid.integral((1.0 + state.rho) * (integrand @ wg)))


def entropy_balance(state: SimState, prev_state: SimState, dt: float,
                    params: ModelParams):
    """(lhs_rate, rhs, residual) of the free-energy balance across one step:
    lhs_rate = [S(state) - S(prev)]/dt + int |grad u|^2 at the midpoint;
    rhs is the kinetic dissipation at the midpoint state."""
    if dt <= 0:
        raise ConfigurationError("entropy balance needs dt > 0")
    grid = state.grid
    s1 = entropy_functional(state, params)
    s0 = entropy_functional(prev_state, params)
    mid = _midpoint_state(state, prev_state)
    visc = 0.0
    for i in range(grid.dim_x):
        for g in grid.grad(mid.u[i]):
            visc += _l2sq_scalar(grid, g)
    lhs = (s1 - s0) / dt + visc
    rhs = entropy_dissipation(mid, params)
    return lhs, rhs, lhs - rhs


# -- macroscopic moment-system residuals ---------------------------------------


def moment_residuals(states, dt: float, convention: str = "constant"):
    """Residual norms of the macroscopic closure at the center of a
    three-state window (spacing dt): the continuity identity for (a, b), the
    momentum-moment identity, and the second-moment identity driven by the
    micro sources l, r, s.  All three vanish as dt and the truncation refine.
    """
    if len(states) < 3:
        raise ConfigurationError("moment residuals need three consecutive states")
    prev, cur, nxt = states[-3], states[-2], states[-1]
    grid, basis = cur.grid, cur.basis
    D = grid.dim_x
    e = [tuple(1 if c == a else 0 for c in range(D)) for a in range(D)]

    a_p, b_p = _moment_fields(prev)
    a_c, b_c = _moment_fields(cur)
    a_n, b_n = _moment_fields(nxt)
    one_rho = 1.0 + cur.rho
    u = cur.u

    # continuity: d_t a + div b = 0
    div_b = np.zeros_like(a_c)
    for a in range(D):
        div_b += grid.derivative(b_c[a], e[a])
    res_a = (a_n - a_p) / (2.0 * dt) + div_b
    norm_a = np.sqrt(_l2sq_scalar(grid, res_a))

    # momentum: d_t b_i + d_i a + sum_j d_j Gamma_ij(w) = -(1+rho) b_i + (1+rho) u_i (1+a)
    w_c = basis.project(cur.f, "IminusP")
    gam_c = _gamma_fields(cur, w_c, convention)
    norm_b_sq = 0.0
    for i in range(D):
        res = (b_n[i] - b_p[i]) / (2.0 * dt) + grid.derivative(a_c, e[i])
        for j in range(D):
            res += grid.derivative(gam_c[(i, j)], e[j])
        res += grid.product(one_rho, b_c[i])
        res -= grid.product(one_rho, grid.product(u[i], 1.0 + a_c))
        norm_b_sq += _l2sq_scalar(grid, res)
    norm_b = np.sqrt(norm_b_sq)

    # second moment: d_j b_i + d_i b_j - (1+rho)(u_i b_j + u_j b_i)
    #                = -d_t Gamma_ij(w) + Gamma_ij(l + r + s)
    w_p = basis.project(prev.f, "IminusP")
    w_n = basis.project(nxt.f, "IminusP")
    gam_p = _gamma_fields(prev, w_p, convention)
    gam_n = _gamma_fields(nxt, w_n, convention)

    lw = basis.apply_L(w_c)
    transport_w = np.zeros_like(w_c)
    for a in range(D):
        vw, _ = basis.mult_v(w_c, a)
        transport_w -= grid.derivative(vw, e[a])
    drift_w = np.zeros_like(w_c)
    for a in range(D):
        rw, _ = basis.raise_neg(w_c, a)
        drift_w -= grid.product(u[a][..., None], rw)
    l_arr = transport_w + lw
    r_arr = drift_w
    s_arr = grid.product(cur.rho[..., None], lw + drift_w)
    src = l_arr + r_arr + s_arr

    norm_g_sq = 0.0
    for i in range(D):
        for j in range(D):
            lhs = grid.derivative(b_c[i], e[j]) + grid.derivative(b_c[j], e[i])
            lhs -= grid.product(one_rho, grid.product(u[i], b_c[j])
                                + grid.product(u[j], b_c[i]))
            lhs += (gam_n[(i, j)] - gam_p[(i, j)]) / (2.0 * dt)
            rhs = basis.gamma(src, i, j, convention=convention)
            norm_g_sq += _l2sq_scalar(grid, lhs - rhs)
    norm_g = np.sqrt(norm_g_sq)
    return float(norm_a), float(norm_b), float(norm_g)


# -- decay-rate fitting ---------------------------------------------------------


def fit_decay(times, values, model: str = "exponential", window=None):
    """Least-squares decay fit on a positive series.

    ``exponential``: log v ~ c - rate * t.  ``algebraic``: log v ~ c + p *
    log(1+t) with ``rate`` the exponent p.  Returns (rate, amplitude,
    r_squared).
    """
    t = np.asarray(times, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.shape != v.shape or t.ndim != 1:
        raise ConfigurationError("times and values must be matching 1-D arrays")
    if window is not None:
        t0, t1 = window
        keep = (t >= t0) & (t <= t1)
        if keep.sum() < 2:
            raise DomainError(f"window {window} selects fewer than two samples")
        t, v = t[keep], v[keep]
    if np.any(v <= 0):
        raise DomainError("decay fit requires strictly positive values in the window")
    y = np.log(v)
    x = t if model == "exponential" else np.log1p(t)
    if model not in ("exponential", "algebraic"):
        raise ConfigurationError(f"unknown fit model {model!r}")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    fitted = A @ np.array([slope, intercept])
    ss_res = float(np.sum((y - fitted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    rate = -slope if model == "exponential" else slope
    return float(rate), float(np.exp(intercept)), float(r2)


# -- full report ----------------------------------------------------------------


@dataclass
class EnergyReport:
    """One time-stamped record of every diagnostic; the CSV row unit."""

    t: float
    E0: float
    E1: float
    D1: float
    E2: float
    D2: float
    E: float
    D: float
    DT1: float
    DT: float
    mass_f: float
    mass_rho: float
    momentum: np.ndarray
    entropy_lhs_rate: float
    entropy_rhs: float
    entropy_residual: float
    moment_residual_a: float
    moment_residual_b: float
    moment_residual_gamma: float
    zero_mean_a: float
    zero_mean_rho: float
    zero_mean_momentum: np.ndarray
    F_min: float
    truncation_leakage: float
    plain_norm: float

    @staticmethod
    def headers(dim_x: int) -> list:
        cols = ["t", "E0", "E1", "D1", "E2", "D2", "E", "D", "DT1", "DT",
                "mass_f", "mass_rho"]
        cols += [f"momentum_{i + 1}" for i in range(dim_x)]
        cols += ["entropy_lhs_rate", "entropy_rhs", "entropy_residual",
                 "moment_residual_a", "moment_residual_b", "moment_residual_gamma",
                 "zero_mean_a", "zero_mean_rho"]
        cols += [f"zero_mean_momentum_{i + 1}" for i in range(dim_x)]
        cols += ["F_min", "truncation_leakage", "plain_norm"]
        return cols

    def to_row(self) -> list:
        row = [self.t, self.E0, self.E1, self.D1, self.E2, self.D2, self.E,
               self.D, self.DT1, self.DT, self.mass_f, self.mass_rho]
        row += list(np.atleast_1d(self.momentum))
        row += [self.entropy_lhs_rate, self.entropy_rhs, self.entropy_residual,
                self.moment_residual_a, self.moment_residual_b,
                self.moment_residual_gamma, self.zero_mean_a, self.zero_mean_rho]
        row += list(np.atleast_1d(self.zero_mean_momentum))
        row += [self.F_min, self.truncation_leakage, self.plain_norm]
        return row


def build_report(window, dt: float, params: ModelParams,
                 weights: FunctionalWeights, convention: str = "constant",
                 cumulative_leakage: float = 0.0) -> EnergyReport:
    """Evaluate every diagnostic on the newest state of a (up to 3-state)
    window.  Time-difference diagnostics (entropy balance, moment residuals)
    need history; with a short window they report 0.  The moment residuals use
    the centered stencil, i.e. they are evaluated one step behind the row
    time.
    """
    state = window[-1]
    totals = energy_total(state, params, weights, convention=convention)
    mass_f, mass_rho, momentum = conserved(state)
    zm_a, zm_rho, zm_mom = zero_mean_check(state)
    if len(window) >= 2:
        lhs, rhs, resid = entropy_balance(window[-1], window[-2], dt, params)
    else:
        lhs = rhs = resid = 0.0
    if len(window) >= 3:
        ra, rb, rg = moment_residuals(window, dt, convention=convention)
    else:
        ra = rb = rg = 0.0
    return EnergyReport(
        t=state.t,
        E0=totals["E0"], E1=totals["E1"], D1=totals["D1"],
        E2=totals["E2"], D2=totals["D2"], E=totals["E"], D=totals["D"],
        DT1=totals["DT1"], DT=totals["DT"],
        mass_f=mass_f, mass_rho=mass_rho, momentum=momentum,
        entropy_lhs_rate=lhs, entropy_rhs=rhs, entropy_residual=resid,
        moment_residual_a=ra, moment_residual_b=rb, moment_residual_gamma=rg,
        zero_mean_a=zm_a, zero_mean_rho=zm_rho, zero_mean_momentum=zm_mom,
        F_min=positivity_min(state),
        truncation_leakage=cumulative_leakage,
        plain_norm=plain_norm(state, weights.s_cap),
    )


# -- weight validation battery ---------------------------------------------------


def battery_states(grid: Grid, basis: HermiteBasis, n_states: int = 100,
                   seed: int = 0, amplitude: float = 0.1):
    """Reference random near-equilibrium states for the norm-equivalence check:
    band-limited in x with geometric mode decay, Hermite content decaying like
    3^-|k|, overall sup-amplitude <= ``amplitude``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    K = basis.spec.n_modes
    D = grid.dim_x
    decay_v = 3.0 ** (-basis.degree.astype(float))
    states = []
    for _ in range(n_states):
        def rand_field():
            out = np.zeros(grid.shape)
            for m in range(1, 4):
                amp = rng.standard_normal() * 2.0**-m
                phase = rng.uniform(0, 2 * np.pi)
                wave = np.ones(grid.shape)
                for ax in range(D):
                    wave = wave * np.cos(2 * np.pi * m * grid.x[ax] / grid.box + phase)
                out += amp * wave
            return out
        f = np.zeros(grid.shape + (K,))
        for k in range(K):
            f[..., k] = decay_v[k] * rand_field()
        rho = rand_field()
        u = np.stack([rand_field() for _ in range(D)])
        sup = max(np.abs(f).max(), np.abs(rho).max(), np.abs(u).max())
        scale = amplitude * rng.uniform(0.5, 1.0) / sup
        states.append(SimState(grid, basis, f * scale, rho * scale, u * scale, 0.0))
    return states


def validate_weights(weights: FunctionalWeights, grid: Grid, basis: HermiteBasis,
                     params: ModelParams, n_states: int = 100, seed: int = 0,
                     amplitude: float = 0.1):
    """Run the norm-equivalence battery: plain/2 <= E <= 2*plain on every
    battery state.  Returns (ok, min_ratio, max_ratio) with ratio = E/plain."""
    ratios = []
    for st in battery_states(grid, basis, n_states=n_states, seed=seed,
                             amplitude=amplitude):
        e = energy_total(st, params, weights)["E"]
        p = plain_norm(st, weights.s_cap)
        ratios.append(e / p)
    ratios = np.array(ratios)
    ok = bool(np.all(ratios >= 0.5) and np.all(ratios <= 2.0))
    return ok, float(ratios.min()), float(ratios.max())
