import numpy as np
import pytest

from monotone_spde.field_space import GridSpec, SpectralField, norm, pairing, random_field
from monotone_spde.noise import HypothesisViolation, NoiseModel, validate_hypotheses

GRID = GridSpec(16)


def model(kind="additive_diagonal", **kw):
    return NoiseModel.build(GRID, kind, **kw)


class TestModel:
    def test_modes_orthonormal(self):
        nz = model(K_max=12)
        fields = [SpectralField(GRID, m) for m in nz.modes]
        gram = np.array([[pairing(a, b) for b in fields] for a in fields])
        assert np.max(np.abs(gram - np.eye(12))) < 1e-14

    def test_sigma_matches_definition(self):
        nz = model("projected_multiplicative", K_max=4, a=0.7, b=0.3)
        u = random_field(GRID, 1, a=2.0)
        sig = nz.sigma(u.coeffs)
        for k in range(4):
            phi = SpectralField(GRID, nz.modes[k])
            expected = nz.coeffs[k] * (0.7 * phi.coeffs + 0.3 * pairing(u, phi) * phi.coeffs)
            assert np.max(np.abs(sig[k] - expected)) < 1e-15

    def test_apply_is_weighted_sum(self):
        nz = model("projected_multiplicative", K_max=5, b=0.5)
        u = random_field(GRID, 2).coeffs
        dW = np.arange(1.0, 6.0)
        assert np.allclose(nz.apply(u, dW), np.tensordot(dW, nz.sigma(u), axes=(0, 0)), atol=1e-15)

    def test_zero_state_closed_form(self):
        nz = model("projected_multiplicative", coeffs=2.0 ** -np.arange(1, 7), a=1.0, b=1.0)
        z = np.zeros((2,) + GRID.shape, complex)
        got = sum(norm(SpectralField(GRID, s)) ** 2 for s in nz.sigma(z))
        assert got == pytest.approx(np.sum(nz.coeffs**2), rel=1e-14)
        assert nz.ito_correction(z) == pytest.approx(got, rel=1e-14)

    def test_power_law_coefficients(self):
        nz = model(K_max=4, c_decay=2.0, amplitude=3.0)
        assert np.allclose(nz.coeffs, 3.0 / np.arange(1, 5) ** 2)

    @pytest.mark.parametrize("kw", [dict(coeffs=[1.0, -1.0]), dict(K_max=0), dict(b=1.0)])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            model(**kw)

    def test_rejects_unknown_kind(self):
        with pytest.raises(ValueError):
            model("colored")

    def test_too_many_modes(self):
        with pytest.raises(ValueError):
            NoiseModel.build(GridSpec(4), K_max=100)


class TestHypotheses:
    def test_additive_has_zero_lipschitz(self):
        rep = validate_hypotheses(model(K_max=8), 200)
        assert rep.ok and rep.empirical["H2"] == 0.0

    def test_multiplicative_geometric(self):
        nz = model("projected_multiplicative", coeffs=2.0 ** -np.arange(1, 9), a=1.0, b=1.0)
        rep = validate_hypotheses(nz, 200)
        assert rep.ok
        assert rep.declared["H1"] == pytest.approx(2 * np.sum(nz.coeffs**2))
        # the u = 0 sample attains a^2 sum c^2 exactly
        assert rep.empirical["H1"] >= np.sum(nz.coeffs**2) * (1 - 1e-12)

    def test_lipschitz_attained_on_first_mode(self):
        nz = model("projected_multiplicative", K_max=4, b=2.0)
        rep = validate_hypotheses(nz, 300)
        assert rep.empirical["H2"] <= nz.L * (1 + 1e-12)
        assert rep.empirical["H2"] > 0.2 * nz.L

    def test_violation_names_hypothesis(self):
        class Lying(NoiseModel):
            @property
            def K(self):
                return 0.01

        nz = Lying(GRID, "additive_diagonal", np.ones(3))
        with pytest.raises(HypothesisViolation) as exc:
            validate_hypotheses(nz, 10)
        assert exc.value.hypothesis == "H1"
        assert "H1" in str(exc.value)

    def test_report_without_raising(self):
        rep = validate_hypotheses(model(K_max=3), 20, raise_on_violation=False)
        assert set(rep.to_dict()["passed"]) == {"H1", "H2", "H3_V2", "H3_Vp(p=3)", "H3_Lr(r=6)"}
