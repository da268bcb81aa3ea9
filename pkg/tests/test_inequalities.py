import json

import numpy as np
import pytest
from scipy.special import gamma

from monotone_spde.field_space import GridSpec, SpectralField, fourier_mode, random_field
from monotone_spde.inequalities import (
    SuiteEntry,
    check_A_strong_monotonicity,
    check_B_interpolation_bound,
    check_C_lipschitz,
    check_C_monotonicity,
    check_coercivity,
    check_global_monotonicity,
    check_hemicontinuity,
    check_local_monotonicity,
    estimate_gn_constant,
    gn_ratio,
    reports_to_csv,
    reports_to_jsonl,
    run_entry,
    sample_batch,
    sides_A_strong,
    sides_B_interpolation,
    sides_C_lipschitz,
    sides_C_monotonicity,
)
from monotone_spde.operators import PhysParams

GRID = GridSpec(16)


def fields(seed, k, a=1.0):
    return [random_field(GRID, seed + i, a=a) for i in range(k)]


def batch(seed, slot, n=64):
    return sample_batch(GRID, seed, np.arange(n), slot)


class TestTrivialCases:
    def test_coercivity_zero_and_p2(self):
        z = SpectralField.zeros(GRID)
        assert check_coercivity(z, 3.0).worst_margin == 0.0
        rep = check_coercivity(fields(0, 1, a=4.0)[0], 2.0)
        assert rep.passed and abs(rep.worst_relative) < 1e-13

    def test_A_strong_equal_fields(self):
        u = fields(1, 1)[0]
        rep = check_A_strong_monotonicity(u, u, 3.0)
        assert rep.passed and rep.worst_margin == 0.0

    def test_A_strong_p2_intermediate_is_equality(self):
        u, v = fields(2, 2, a=3.0)
        rep = check_A_strong_monotonicity(u, v, 2.0)
        assert rep.passed
        assert abs(rep.details["intermediate"]["worst_relative"]) < 1e-12

    def test_C_monotonicity_r2_equality(self):
        u, v = fields(3, 2)
        rep = check_C_monotonicity(u, v, 2.0)
        assert rep.passed and abs(rep.worst_relative) < 1e-12

    def test_C_lipschitz_trivial(self):
        u, v = fields(4, 2)
        z = SpectralField.zeros(GRID)
        assert check_C_lipschitz(u, u, v, 4.0).passed
        assert check_C_lipschitz(u, v, z, 4.0).worst_margin == 0.0

    def test_B_interpolation_skew(self):
        u = fields(5, 1)[0]
        rep = check_B_interpolation_bound(u, u, 6.0)
        assert rep.passed and rep.worst_relative == pytest.approx(1.0, abs=1e-10)

    def test_B_interpolation_rejects_r4(self):
        u, v = fields(6, 2)
        with pytest.raises(ValueError):
            check_B_interpolation_bound(u, v, 4.0)

    def test_global_regime_mismatch(self):
        u, v = fields(7, 2)
        with pytest.raises(ValueError, match="GLOBAL"):
            check_global_monotonicity(u, v, PhysParams(r=3.0))

    def test_local_regime_mismatch(self):
        u, v = fields(8, 2)
        with pytest.raises(ValueError):
            check_local_monotonicity(u, v, PhysParams(p=2.0, r=2.0, d=3), 0.5)


class TestSampledChecks:
    """Small-sample versions of the lattice; the full 10^4 run is the acceptance test."""

    @pytest.mark.parametrize("p", [2.5, 3.0, 4.0, 5.0])
    def test_A_strong(self, p):
        u = [SpectralField(GRID, c) for c in batch(0, 0)]
        v = [SpectralField(GRID, c) for c in batch(0, 1)]
        assert check_A_strong_monotonicity(u, v, p).passed

    def test_global_r6(self):
        u = [SpectralField(GRID, c) for c in batch(1, 0)]
        v = [SpectralField(GRID, c) for c in batch(1, 1)]
        rep = check_global_monotonicity(u, v, PhysParams(r=6.0))
        assert rep.passed and rep.samples == 64

    def test_local_navier_stokes(self):
        u = [SpectralField(GRID, c) for c in batch(2, 0)]
        v = [SpectralField(GRID, c) for c in batch(2, 1)]
        prm = PhysParams(beta=0.0, p=2.0, r=2.0)
        assert check_local_monotonicity(u, v, prm, 1.5 * estimate_gn_constant(GRID, 2.0, n_opt_steps=50)).passed


class TestHomogeneity:
    @pytest.mark.parametrize("c", [0.5, 2.0])
    def test_degrees(self, c):
        u, v, w = batch(3, 0), batch(3, 1), batch(3, 2)
        cases = [
            (sides_C_monotonicity, (u, v), (6.0,), 6.0, ("weighted", "Lr")),
            (sides_C_lipschitz, (u, v), (w, 6.0), 5.0, ("main",)),
            (sides_B_interpolation, (u, v), (6.0,), 3.0, ("main",)),
            (sides_A_strong, (u, v), (2.0,), 2.0, ("main", "intermediate")),
        ]
        for fn, scaled, rest, deg, forms in cases:
            base = fn(GRID, *scaled, *rest)
            moved = fn(GRID, *[c * x for x in scaled], *rest)
            for f in forms:
                m0 = base[f][0] - base[f][1]
                m1 = moved[f][0] - moved[f][1]
                scale = np.abs(base[f][0]) + np.abs(base[f][1])
                assert np.all(np.abs(m1 - c**deg * m0) <= 1e-10 * c**deg * scale), (fn.__name__, f)


class TestGagliardoNirenberg:
    @staticmethod
    def single_mode_ratio(p, q_vec, d=2):
        q = 2 * p / (p - 1)
        vol = (2 * np.pi) ** d
        h2 = vol / 2
        v2 = np.dot(q_vec, q_vec) * h2
        mean_abs_sin_q = gamma((q + 1) / 2) / (np.sqrt(np.pi) * gamma(q / 2 + 1))
        lq2 = (vol * mean_abs_sin_q) ** (2 / q)
        return lq2 / (v2 ** (d / (2 * p)) * h2 ** ((2 * p - d) / (2 * p)))

    @pytest.mark.parametrize("p", [2.0, 3.0])
    def test_single_mode_closed_form(self, p):
        w = fourier_mode(GRID, (0, 1), (1.0, 0.0), "sin")
        got = gn_ratio(GRID, w.coeffs[None], p)[0]
        tol = 1e-12 if p == 2 else 1e-3  # |sin|^3 is not a trigonometric polynomial
        assert got == pytest.approx(self.single_mode_ratio(p, (0, 1)), rel=tol)
        assert estimate_gn_constant(GRID, p, n_samples=16, n_opt_steps=20) >= got

    def test_scale_invariance(self):
        c = random_field(GRID, 1).coeffs[None]
        assert gn_ratio(GRID, 3.7 * c, 2.0)[0] == pytest.approx(gn_ratio(GRID, c, 2.0)[0], rel=1e-13)

    def test_zero_skipped(self):
        assert np.isnan(gn_ratio(GRID, np.zeros((1, 2) + GRID.shape, complex), 2.0)[0])

    def test_refinement_stable(self):
        a = estimate_gn_constant(GridSpec(16), 2.0)
        b = estimate_gn_constant(GridSpec(32), 2.0)
        assert abs(a - b) <= 0.1 * max(a, b)

    def test_rejects_small_p(self):
        with pytest.raises(ValueError):
            estimate_gn_constant(GRID, 1.0)


class TestHemicontinuity:
    def test_zero_direction(self):
        u, v = fields(10, 2)
        rep = check_hemicontinuity(u, SpectralField.zeros(GRID), v, PhysParams())
        assert rep.passed and all(x == 0 for x in rep.details["difference"])

    def test_linear_decay(self):
        u, w, v = fields(11, 3)
        assert check_hemicontinuity(u, w, v, PhysParams(p=3.0, r=5.0)).passed

    def test_navier_stokes_slope(self):
        u, w, v = fields(12, 3, a=2.0)
        rep = check_hemicontinuity(u, w, v, PhysParams(beta=0.0, p=2.0, r=2.0))
        d = rep.details
        assert d["fitted_slope"] == pytest.approx(d["exact_slope"], rel=1e-8)

    def test_rejects_bad_grid(self):
        u, w, v = fields(13, 3)
        with pytest.raises(ValueError):
            check_hemicontinuity(u, w, v, PhysParams(), [0.1, 0.2])


class TestSuiteRunner:
    def test_deterministic_and_batch_independent(self):
        e = SuiteEntry("C_monotonicity[r=5]", "C_mono", {"r": 5.0}, 2)
        a = run_entry(e, GRID, 120, seed=7, batch_size=50)
        b = run_entry(e, GRID, 120, seed=7, batch_size=120)
        assert reports_to_jsonl(a) == reports_to_jsonl(b)
        assert a[0].passed and a[1].name.endswith("/canary")

    @pytest.mark.parametrize("entry", [
        SuiteEntry("coercivity", "coercivity", {"p": 3.0}, 1),
        SuiteEntry("A_strong", "A_strong", {"p": 3.0}, 2),
        SuiteEntry("C_mono", "C_mono", {"r": 4.0}, 2),
    ])
    def test_canaries_fire(self, entry):
        main, canary = run_entry(entry, GRID, 200, seed=1)
        assert main.violations == 0
        assert canary.violation_fraction >= 0.01

    def test_exports(self):
        reps = run_entry(SuiteEntry("x", "coercivity", {"p": 2.5}, 1), GRID, 20, seed=2)
        rows = [json.loads(line) for line in reports_to_jsonl(reps).splitlines()]
        assert rows[0]["samples"] == 20 and rows[1]["violation_fraction"] > 0
        csv_text = reports_to_csv(reps)
        assert csv_text.startswith("check,samples,violations") and csv_text.count("\r\n") == 3
