import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monotone_spde.field_space import (
    GridSpec,
    SpectralField,
    fourier_mode,
    norm,
    pairing,
    random_field,
    raw_power,
    to_physical,
)
from monotone_spde.operators import (
    PhysParams,
    Regime,
    aliasing_diagnostic,
    constant_eta,
    constant_eta_tilde,
    drift_G,
    op_A,
    op_B,
    op_C,
    potential_A,
    potential_C,
    stokes,
    trilinear_b,
)

GRID = GridSpec(16)


def shear(a=1.0, q=1, kind="sin", grid=GRID):
    return fourier_mode(grid, (0, q), (a, 0.0), kind)


def e1_mode(grid, coeff_by_q):
    u = SpectralField.zeros(grid)
    for q, c in coeff_by_q.items():
        u = u + shear(c, q, grid=grid)
    return u


class TestOpA:
    def test_zero(self):
        assert np.all(op_A(SpectralField.zeros(GRID), 3.0).coeffs == 0)

    def test_p2_is_stokes(self):
        g = GridSpec(32)
        for seed in range(5):
            u = random_field(g, seed, a=5.0)
            ref = stokes(u).coeffs
            err = np.max(np.abs(op_A(u, 2.0).coeffs - ref)) / np.max(np.abs(ref))
            assert err <= 1e-13

    def test_shear_p4_closed_form(self):
        a = 0.7
        expected = e1_mode(GRID, {1: a + 0.75 * a**3, 3: 0.75 * a**3})
        got = op_A(shear(a), 4.0)
        assert np.max(np.abs(got.coeffs - expected.coeffs)) < 1e-14

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            op_A(shear(), 1.5)

    @pytest.mark.parametrize("p", [2.5, 3.0, 4.0])
    def test_potential_derivative(self, p):
        u, w = random_field(GRID, 1, a=2.0), random_field(GRID, 2)
        h = 1e-5
        fd = (potential_A(u + h * w, p) - potential_A(u - h * w, p)) / (2 * h)
        assert pairing(op_A(u, p), w) == pytest.approx(fd, rel=1e-6)

    def test_divergence_free_and_real(self):
        u = random_field(GRID, 4, a=3.0)
        A = op_A(u, 3.0)
        assert A.divergence_max() < 1e-12 * np.max(np.abs(A.coeffs))
        assert A.hermitian_defect() < 1e-14 * np.max(np.abs(A.coeffs))


class TestOpB:
    def test_shear_self_advection_vanishes(self):
        assert np.max(np.abs(op_B(shear(), shear()).coeffs)) < 1e-16

    def test_single_shell_is_steady(self):
        # fields on one |k| shell have (u.grad)u equal to a gradient
        u = fourier_mode(GRID, (1, 0), (0.0, 1.0), "cos") + shear(0.5)
        assert np.max(np.abs(op_B(u, u).coeffs)) < 1e-15

    def test_shear_advecting_cross_mode(self):
        # u = (sin x2, 0), v = (0, sin x1): (u.grad) v = sin x2 cos x1 e2
        u = shear()
        v = fourier_mode(GRID, (1, 0), (0.0, 1.0), "sin")
        x = GRID.coords()
        b = op_B(u, v)
        # projection of sin x2 cos x1 e2 onto divergence-free fields, by hand:
        # f = sin x2 cos x1 = (sin(x1+x2) - sin(x1-x2)) / 2 and P e2 = (-1/2, 1/2), (1/2, 1/2)
        # on k = (1, 1), (1, -1)
        f = np.sin(x[1]) * np.cos(x[0])
        g2 = np.cos(x[1]) * np.sin(x[0])
        expected = np.stack([-0.5 * g2, 0.5 * f])
        assert np.allclose(to_physical(b), expected, atol=1e-14)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**31))
    def test_trilinear_identities(self, seed):
        u, v, w = (random_field(GRID, seed + i, a=3.0) for i in range(3))
        scale = norm(u, "Lr", 4) * norm(v, "V2") * norm(w, "Lr", 4)
        assert abs(trilinear_b(u, v, v)) <= 1e-11 * scale
        assert abs(trilinear_b(u, v, w) + trilinear_b(u, w, v)) <= 1e-11 * scale
        assert trilinear_b(u, v, w) == pytest.approx(pairing(op_B(u, v), w), rel=1e-10, abs=1e-12 * scale)


class TestOpC:
    def test_r2_is_identity(self):
        u = random_field(GRID, 3)
        assert np.max(np.abs(op_C(u, 2.0).coeffs - u.coeffs)) < 1e-16

    def test_shear_r4_closed_form(self):
        a = 1.3
        expected = e1_mode(GRID, {1: 0.75 * a**3, 3: -0.25 * a**3})
        assert np.max(np.abs(op_C(shear(a), 4.0).coeffs - expected.coeffs)) < 1e-14

    def test_pairing_with_self_is_Lr_power(self):
        u = random_field(GRID, 8, a=2.0)
        assert pairing(op_C(u, 6.0), u) == pytest.approx(raw_power(u, "Lr", 6.0), rel=1e-12)

    @pytest.mark.parametrize("r", [3.0, 4.0, 6.0])
    def test_potential_derivative(self, r):
        u, w = random_field(GRID, 5, a=2.0), random_field(GRID, 6)
        h = 1e-5
        fd = (potential_C(u + h * w, r) - potential_C(u - h * w, r)) / (2 * h)
        assert pairing(op_C(u, r), w) == pytest.approx(fd, rel=1e-6)


class TestAliasing:
    @pytest.mark.parametrize("op,args", [(op_C, (4.0,)), (op_A, (2.0,))])
    def test_polynomial_ops_exact(self, op, args):
        u = random_field(GridSpec(8), 1)
        assert aliasing_diagnostic(u, op, *args) < 1e-13

    def test_B_exact(self):
        u = random_field(GridSpec(8), 1)
        assert aliasing_diagnostic(u, lambda f: op_B(f, f)) < 1e-13

    def test_non_polynomial_small(self):
        u = random_field(GridSpec(16), 1)
        assert aliasing_diagnostic(u, op_A, 3.0) < 1e-2


class TestParamsAndConstants:
    @pytest.mark.parametrize("kw,regime", [
        (dict(r=6.0), Regime.GLOBAL),
        (dict(r=4.0, beta=0.5, mu=1.0), Regime.GLOBAL),
        (dict(r=4.0, beta=0.4, mu=1.0, p=2.0), Regime.LOCAL),
        (dict(r=3.0, p=2.0), Regime.LOCAL),
        (dict(r=6.0, beta=0.0, p=2.0), Regime.LOCAL),
        (dict(r=3.0, p=2.0, d=3), Regime.NONE),
        (dict(r=3.0, p=2.5, d=3), Regime.LOCAL),
    ])
    def test_regime_table(self, kw, regime):
        assert PhysParams(**kw).regime is regime

    @pytest.mark.parametrize("kw", [dict(mu=0.0), dict(beta=-1.0), dict(p=1.5), dict(r=1.0), dict(d=4), dict(alpha=1.0)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            PhysParams(**kw)

    def test_eta_value(self):
        assert constant_eta(PhysParams(r=6.0)) == pytest.approx(0.125, rel=1e-15)

    def test_eta_large_r_limit(self):
        assert constant_eta(PhysParams(r=1e7)) == pytest.approx(0.5, rel=1e-5)

    def test_eta_rejects(self):
        with pytest.raises(ValueError):
            constant_eta(PhysParams(r=4.0))
        with pytest.raises(ValueError):
            constant_eta(PhysParams(r=6.0, beta=0.0))

    def test_eta_tilde_value(self):
        assert constant_eta_tilde(PhysParams(p=2.0), 1.0) == pytest.approx(0.5, rel=1e-15)
        with pytest.raises(ValueError):
            constant_eta_tilde(PhysParams(p=2.0), 0.0)

    def test_drift_composition(self):
        prm = PhysParams(mu=0.7, beta=1.3, p=3.0, r=5.0)
        u = random_field(GRID, 9, a=2.0)
        expected = 0.7 * op_A(u, 3.0).coeffs + op_B(u, u).coeffs + 1.3 * op_C(u, 5.0).coeffs
        assert np.max(np.abs(drift_G(u, prm).coeffs - expected)) < 1e-12 * np.max(np.abs(expected))
