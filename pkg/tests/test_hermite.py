"""Velocity-space operator tests against independent oracles: finite-difference
discretizations of the drift-diffusion operator on a fine grid, and raw
Gauss-Hermite quadrature built directly from numpy's nodes (not the package
tables)."""

import numpy as np
import pytest

from kineticfluid.errors import ConfigurationError, DimensionError, ShapeError
from kineticfluid.hermite import (
    BasisSpec,
    VelocityCoeffs,
    analyze,
    apply_L,
    apply_ladder,
    build_basis,
    coercivity_probe,
    gamma,
    hermite_functions,
    moments,
    nu_inner,
    project,
    psi_at,
    synthesize,
)


def unit(spec, k, value=1.0):
    c = np.zeros(spec.n_modes)
    c[k] = value
    return VelocityCoeffs(spec, c)


def psi_fine(order, v):
    """Independent basis evaluation on a fine grid: direct recurrence for
    He_k, explicit Gaussian weight and normalization."""
    he = np.empty((order, v.size))
    he[0] = 1.0
    if order > 1:
        he[1] = v
    for k in range(1, order - 1):
        he[k + 1] = v * he[k] - k * he[k - 1]
    fact = np.cumprod(np.concatenate(([1.0], np.arange(1, order, dtype=float))))
    sqrt_m = (2 * np.pi) ** -0.25 * np.exp(-(v**2) / 4.0)
    return he / np.sqrt(fact)[:, None] * sqrt_m


def gh_rule(q):
    """Plain Gauss-Hermite rule for integrals of poly * exp(-v^2/2)."""
    x, w = np.polynomial.hermite.hermgauss(q)
    v = x * np.sqrt(2.0)
    return v, w * np.sqrt(2.0) * np.exp(v**2 / 2.0)


# -- basis construction --------------------------------------------------------


def test_quadrature_orthonormality_1d():
    basis = build_basis(BasisSpec(dim=1, order=4, quad_size=8))
    P, W = basis.quad.psi_values, basis.quad.weights
    gram = (P.T * W) @ P
    assert np.abs(gram - np.eye(4)).max() <= 1e-12


def test_order_below_four_rejected():
    with pytest.raises(ConfigurationError):
        BasisSpec(dim=1, order=2, quad_size=8)


def test_quad_size_below_order_plus_two_rejected():
    with pytest.raises(ConfigurationError):
        BasisSpec(dim=1, order=8, quad_size=9)


def test_2d_table_shape_and_origin_value():
    spec = BasisSpec(dim=2, order=8, quad_size=12)
    basis = build_basis(spec)
    assert basis.quad.psi_values.shape == (12**2, 8**2)
    # ground-mode value at the origin straight from the defining formula
    direct = (2 * np.pi) ** -0.5
    assert abs(psi_at(spec, np.array([[0.0, 0.0]]))[0, 0] - direct) <= 1e-14
    gram = (basis.quad.psi_values.T * basis.quad.weights) @ basis.quad.psi_values
    assert np.abs(gram - np.eye(64)).max() <= 1e-12


# -- collision operator ---------------------------------------------------------


def fokker_planck_fd(g_vals, v):
    """(1/sqrt(G)) d/dv [ G d/dv (g/sqrt(G)) ] by central differences."""
    sqrt_m = (2 * np.pi) ** -0.25 * np.exp(-(v**2) / 4.0)
    m = sqrt_m**2
    h = v[1] - v[0]
    inner = g_vals / sqrt_m
    dinner = np.gradient(inner, h, edge_order=2)
    flux = m * dinner
    return np.gradient(flux, h, edge_order=2) / sqrt_m


def test_collision_kernel_is_ground_mode():
    spec = BasisSpec(dim=1, order=4)
    assert np.all(apply_L(unit(spec, 0)).c == 0.0)


def test_collision_eigenvalue_fd_oracle():
    # oracle: fine-grid finite differences of the defining operator
    v = np.linspace(-12, 12, 20001)
    tbl = psi_fine(8, v)
    spec = BasisSpec(dim=1, order=8)
    out = apply_L(unit(spec, 2))
    lg = fokker_planck_fd(tbl[2], v)
    proj = np.trapezoid(lg * tbl[2], v)          # component on psi_2
    assert abs(proj - (-2.0)) < 1e-6
    assert np.allclose(out.c, -2.0 * unit(spec, 2).c)


def test_collision_fd_oracle_mode_by_mode():
    v = np.linspace(-12, 12, 20001)
    tbl = psi_fine(4, v)
    spec = BasisSpec(dim=1, order=4)
    g = VelocityCoeffs(spec, np.ones(4))
    out = apply_L(g)
    expected = np.array([np.trapezoid(fokker_planck_fd(tbl[k], v) * tbl[k], v)
                         for k in range(4)])
    assert np.abs(expected - np.array([0.0, -1.0, -2.0, -3.0])).max() < 1e-6
    assert np.array_equal(out.c, np.array([0.0, -1.0, -2.0, -3.0]))


def test_diagonality_exact_random():
    rng = np.random.default_rng(0)
    for spec in (BasisSpec(1, 16), BasisSpec(2, 6), BasisSpec(3, 4)):
        basis = build_basis(spec)
        g = rng.standard_normal(spec.n_modes)
        assert np.array_equal(basis.apply_L(g), -basis.degree * g)


def test_self_adjoint_and_nonpositive():
    rng = np.random.default_rng(1)
    spec = BasisSpec(1, 12)
    for _ in range(20):
        g, h = rng.standard_normal((2, spec.n_modes))
        gl = apply_L(VelocityCoeffs(spec, g)).c
        hl = apply_L(VelocityCoeffs(spec, h)).c
        assert abs(gl @ h - g @ hl) < 1e-12
        assert -(gl @ g) >= 0.0


def test_decomposition_identity_exact():
    # L g = L (I-P) g - P1 g, exact in coefficients
    rng = np.random.default_rng(2)
    for spec in (BasisSpec(1, 8), BasisSpec(2, 5)):
        g = VelocityCoeffs(spec, rng.standard_normal(spec.n_modes))
        lhs = apply_L(g).c
        rhs = apply_L(project(g, "IminusP")).c - project(g, "P1").c
        assert np.array_equal(lhs, rhs)


# -- ladder actions --------------------------------------------------------------


def test_lower_annihilates_ground_mode():
    spec = BasisSpec(1, 6)
    assert np.all(apply_ladder(unit(spec, 0), "lower", 0).c == 0.0)


def test_mult_v_quadrature_oracle():
    # oracle: <v psi_1, psi_j> by raw Gauss-Hermite quadrature
    spec = BasisSpec(1, 4)
    v, w = gh_rule(12)
    tbl = psi_fine(4, v)
    expected = np.array([np.sum(w * v * tbl[1] * tbl[j]) for j in range(4)])
    got = apply_ladder(unit(spec, 1), "mult_v", 0).c
    assert np.abs(got - expected).max() < 1e-12
    assert abs(got[2] - np.sqrt(2.0)) < 1e-15 and abs(got[0] - 1.0) < 1e-15


def test_raise_then_lower_matches_collision():
    spec = BasisSpec(1, 10)
    for k in range(8):
        g = unit(spec, k)
        comp = apply_ladder(apply_ladder(g, "raise_neg", 0), "lower", 0)
        assert np.allclose(comp.c, -(k + 1.0) * g.c)
    # and lower-then-raise_neg reproduces the diagonal collision eigenvalue
    for k in range(1, 9):
        g = unit(spec, k)
        comp = apply_ladder(apply_ladder(g, "lower", 0), "raise_neg", 0)
        assert np.allclose(comp.c, apply_L(g).c)


def test_ladder_adjointness_random():
    rng = np.random.default_rng(3)
    spec = BasisSpec(2, 6)
    basis = build_basis(spec)
    for _ in range(30):
        g, h = rng.standard_normal((2, spec.n_modes))
        for ax in range(2):
            lg, _ = basis.lower(g, ax)
            rh, _ = basis.raise_neg(h, ax)
            assert abs(lg @ h + g @ rh) < 1e-10


def test_truncation_leakage_reported():
    spec = BasisSpec(1, 4)
    top = unit(spec, 3, 2.0)
    out = apply_ladder(top, "mult_v", 0)
    # raised part sqrt(4)*2 dropped past the truncation
    assert out.leakage == pytest.approx((2.0 * 2.0) ** 2)
    assert apply_ladder(top, "lower", 0).leakage == 0.0


def test_axis_out_of_range():
    spec = BasisSpec(1, 4)
    with pytest.raises(DimensionError):
        apply_ladder(unit(spec, 0), "mult_v", 1)


def test_range_identity_momentum_modes():
    # lowering the fluid projection returns exactly b_a on the ground mode
    rng = np.random.default_rng(4)
    spec = BasisSpec(3, 4)
    basis = build_basis(spec)
    g = VelocityCoeffs(spec, rng.standard_normal(spec.n_modes))
    pg = project(g, "P")
    _, b = moments(g)
    for ax in range(3):
        low = apply_ladder(pg, "lower", ax)
        expected = np.zeros(spec.n_modes)
        expected[0] = b[ax]
        assert np.allclose(low.c, expected, atol=1e-15)


# -- moments and second-moment functional -----------------------------------------


def test_moments_zero():
    spec = BasisSpec(1, 4)
    a, b = moments(VelocityCoeffs(spec, np.zeros(4)))
    assert a == 0.0 and np.all(b == 0.0)


def test_moments_quadrature_oracle_3d():
    spec = BasisSpec(3, 4)
    basis = build_basis(spec)
    g = unit(spec, int(basis.idx_e[1]))      # second-axis momentum mode
    v, w = gh_rule(8)
    tbl = psi_fine(4, v)
    # independent tensor quadrature of the defining integrals
    nodes = np.array(np.meshgrid(v, v, v, indexing="ij")).reshape(3, -1)
    wts = (w[:, None, None] * w[None, :, None] * w[None, None, :]).ravel()
    psi_e2 = (tbl[0][:, None, None] * tbl[1][None, :, None] * tbl[0][None, None, :]).ravel()
    sqrt_m = (2 * np.pi) ** -0.75 * np.exp(-np.sum(nodes**2, axis=0) / 4.0)
    a_oracle = np.sum(wts * sqrt_m * psi_e2)
    b_oracle = np.array([np.sum(wts * nodes[i] * sqrt_m * psi_e2) for i in range(3)])
    a, b = moments(g)
    assert abs(a - a_oracle) < 1e-12 and np.abs(b - b_oracle).max() < 1e-12
    assert a == 0.0 and np.allclose(b, [0.0, 1.0, 0.0])


def test_moments_mixture():
    spec = BasisSpec(1, 6)
    c = np.zeros(6)
    c[0], c[1], c[2] = 3.0, 2.0, 5.0
    a, b = moments(VelocityCoeffs(spec, c))
    assert a == 3.0 and b[0] == 2.0


def test_gamma_diagonal_quadrature_oracle():
    spec = BasisSpec(1, 6)
    v, w = gh_rule(12)
    tbl = psi_fine(6, v)
    sqrt_m = (2 * np.pi) ** -0.25 * np.exp(-(v**2) / 4.0)
    oracle = np.sum(w * (v**2 - 1.0) * sqrt_m * tbl[2])
    got = gamma(unit(spec, 2), 0, 0)
    assert abs(got - oracle) < 1e-12
    assert abs(got - np.sqrt(2.0)) < 1e-15


def test_gamma_offdiagonal_picks_up_mass():
    spec = BasisSpec(2, 4)
    g = unit(spec, 0)
    v, w = gh_rule(8)
    tbl = psi_fine(4, v)
    wts = (w[:, None] * w[None, :]).ravel()
    v1 = np.repeat(v, v.size)
    v2 = np.tile(v, v.size)
    sqrt_m = (2 * np.pi) ** -0.5 * np.exp(-(v1**2 + v2**2) / 4.0)
    psi0 = (tbl[0][:, None] * tbl[0][None, :]).ravel()
    oracle = np.sum(wts * (v1 * v2 - 1.0) * sqrt_m * psi0)
    got = gamma(g, 0, 1)
    assert abs(got - oracle) < 1e-12
    assert abs(got - (-1.0)) < 1e-15
    # kronecker convention drops the mass term off the diagonal
    assert gamma(g, 0, 1, convention="kronecker") == 0.0


def test_gamma_micro_input_mass_free():
    rng = np.random.default_rng(5)
    spec = BasisSpec(2, 5)
    g = project(VelocityCoeffs(spec, rng.standard_normal(spec.n_modes)), "IminusP")
    assert g.c[0] == 0.0
    assert gamma(g, 0, 1) == gamma(g, 0, 1, convention="kronecker")


# -- projections ------------------------------------------------------------------


def test_projection_examples():
    spec = BasisSpec(1, 6)
    assert np.all(project(unit(spec, 0), "IminusP").c == 0.0)
    g = VelocityCoeffs(spec, unit(spec, 2).c + unit(spec, 1).c)
    assert np.array_equal(project(g, "P").c, unit(spec, 1).c)


def test_projection_pythagoras_and_idempotence():
    rng = np.random.default_rng(6)
    for spec in (BasisSpec(1, 8), BasisSpec(2, 5)):
        for _ in range(10):
            g = VelocityCoeffs(spec, rng.standard_normal(spec.n_modes))
            pg, mg = project(g, "P"), project(g, "IminusP")
            assert abs(pg.c @ pg.c + mg.c @ mg.c - g.c @ g.c) <= 1e-12
            assert abs(pg.c @ mg.c) == 0.0
            assert np.array_equal(project(pg, "P").c, pg.c)


# -- weighted inner product --------------------------------------------------------


def test_nu_inner_ground_mode_value():
    spec = BasisSpec(1, 4)
    g = unit(spec, 0)
    # fine-grid oracle of int (g'^2 + (1+v^2) g^2) dv
    v = np.linspace(-14, 14, 40001)
    vals = psi_fine(4, v)[0]
    dvals = np.gradient(vals, v[1] - v[0], edge_order=2)
    oracle = np.trapezoid(dvals**2 + (1 + v**2) * vals**2, v)
    got = nu_inner(g, g)
    assert abs(got - oracle) < 1e-6
    assert got == pytest.approx(9.0 / 4.0, abs=1e-14)


def test_nu_inner_parity_and_zero():
    spec = BasisSpec(1, 4)
    assert nu_inner(unit(spec, 0), unit(spec, 1)) == pytest.approx(0.0, abs=1e-14)
    z = VelocityCoeffs(spec, np.zeros(4))
    assert nu_inner(z, z) == 0.0


def test_nu_inner_dominates_l2_and_symmetry():
    rng = np.random.default_rng(7)
    spec = BasisSpec(2, 6)
    for _ in range(10):
        g = VelocityCoeffs(spec, rng.standard_normal(spec.n_modes))
        h = VelocityCoeffs(spec, rng.standard_normal(spec.n_modes))
        assert nu_inner(g, h) == pytest.approx(nu_inner(h, g), rel=1e-13)
        assert nu_inner(g, g) >= g.c @ g.c


def test_nu_inner_quadrature_consistency():
    # coefficient-space values against the quadrature-evaluated integral,
    # derivatives taken from the recurrence psi_k' = (sqrt(k) psi_{k-1}
    # - sqrt(k+1) psi_{k+1})/2 evaluated directly
    rng = np.random.default_rng(8)
    spec = BasisSpec(1, 8, quad_size=12)
    basis = build_basis(spec)
    v, w = gh_rule(12)
    tbl = psi_fine(9, v)
    sq = np.sqrt(np.arange(10.0))
    dtbl = np.zeros((8, v.size))
    for k in range(8):
        dtbl[k] = 0.5 * ((sq[k] * tbl[k - 1] if k else 0.0) - sq[k + 1] * tbl[k + 1])
    for _ in range(10):
        g = rng.standard_normal(8)
        h = rng.standard_normal(8)
        gv, hv = g @ tbl[:8], h @ tbl[:8]
        dgv, dhv = g @ dtbl, h @ dtbl
        quad_val = np.sum(w * (dgv * dhv + (1 + v**2) * gv * hv))
        coef_val = nu_inner(VelocityCoeffs(spec, g), VelocityCoeffs(spec, h))
        assert abs(coef_val - quad_val) <= 1e-10


def test_nu_inner_spec_mismatch():
    with pytest.raises(ShapeError):
        nu_inner(unit(BasisSpec(1, 4), 0), unit(BasisSpec(1, 6), 0))


# -- synthesis / analysis ------------------------------------------------------------


def test_synthesize_ground_mode_values():
    spec = BasisSpec(1, 4, quad_size=8)
    basis = build_basis(spec)
    vals = synthesize(unit(spec, 0))
    direct = (2 * np.pi) ** -0.25 * np.exp(-basis.quad.nodes[:, 0] ** 2 / 4.0)
    assert np.abs(vals - direct).max() < 1e-14


def test_round_trip_resolved_modes():
    rng = np.random.default_rng(9)
    spec = BasisSpec(1, 8, quad_size=12)
    g = VelocityCoeffs(spec, rng.standard_normal(8))
    back = analyze(synthesize(g), spec)
    assert np.abs(back.c - g.c).max() <= 1e-12
    top = unit(spec, 7)
    assert np.abs(analyze(synthesize(top), spec).c - top.c).max() <= 1e-12


def test_unresolved_mode_dropped_exactly():
    # samples of the first unresolved basis function project to zero on the
    # resolved modes (the quadrature is exact for all the products involved)
    spec = BasisSpec(1, 8, quad_size=12)
    basis = build_basis(spec)
    tbl = psi_fine(9, basis.quad.nodes[:, 0])
    dropped = analyze(tbl[8], spec)
    oracle = np.array([np.sum(basis.quad.weights * tbl[8] * tbl[k]) for k in range(8)])
    assert np.abs(dropped.c - oracle).max() < 1e-13
    assert np.abs(dropped.c).max() <= 1e-12


# -- coercivity -------------------------------------------------------------------


def test_coercivity_momentum_mode_quotient():
    spec = BasisSpec(1, 8)
    v, w = gh_rule(14)
    tbl = psi_fine(9, v)
    sq = np.sqrt(np.arange(10.0))
    d1 = 0.5 * (sq[1] * tbl[0] - sq[2] * tbl[2])
    denom_oracle = np.sum(w * (d1**2 + (1 + v**2) * tbl[1] ** 2))
    g = unit(spec, 1)
    denom = nu_inner(g, g)
    assert abs(denom - denom_oracle) < 1e-10
    quotient = 1.0 / denom
    assert quotient == pytest.approx(4.0 / 19.0, rel=1e-12)


def test_coercivity_positive_and_stable():
    lam16, _ = coercivity_probe(BasisSpec(1, 16), "eigensolve")
    lam32, _ = coercivity_probe(BasisSpec(1, 32), "eigensolve")
    assert lam16 > 0 and lam32 > 0
    assert abs(lam16 - lam32) <= 0.1 * lam32


def test_coercivity_random_bounds_eigensolve():
    spec = BasisSpec(1, 16)
    lam_eig, _ = coercivity_probe(spec, "eigensolve")
    lam_rand, desc = coercivity_probe(spec, "random", samples=1000)
    assert lam_rand >= lam_eig
    assert desc["samples"] == 1000


def test_coercivity_argmin_description():
    lam, desc = coercivity_probe(BasisSpec(1, 16), "eigensolve")
    modes = dict((tuple(k), wgt) for k, wgt in
                 ((tuple(m), w) for m, w in desc["argmin_modes"]))
    assert max(modes.values()) > 0.5    # minimizer concentrates at low index
