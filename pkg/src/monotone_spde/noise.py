"""Finite-mode noise sigma_k(t, u) = c_k (a phi_k + b Pi_k u).

phi_k are the real orthonormal divergence-free Fourier modes returned by
``divfree_modes`` and Pi_k u = (u, phi_k) phi_k, so every sigma_k(u) is the
scalar c_k (a + b z_k) times phi_k with z_k = (u, phi_k).  The additive kind
is b = 0.

Declared constants (Poincare constant 1 on mean-free fields, Hoelder on a
torus of volume |O| for the Vp and Lr variants):

    K     = 2 max(a^2, b^2) sum c_k^2
    L     = b^2 max c_k^2
    K_V2  = 2 max(a^2, b^2) sum c_k^2 |q_k|^2
    K_Vp  = 2 max(a^2, b^2) sum c_k^2 ||phi_k||_Vp^2 max(1, |O|^(1-2/p))
    K_Lr  = 2 max(a^2, b^2) sum c_k^2 ||phi_k||_Lr^2 max(1, |O|^(1-2/r))
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .field_space import GridSpec, divfree_modes, frob2, grad_coeffs, quad, random_coeffs, to_padded, vec2
from .rng import stream

KINDS = ("additive_diagonal", "projected_multiplicative")


class HypothesisViolation(RuntimeError):
    def __init__(self, hypothesis: str, empirical: float, declared: float):
        super().__init__(f"{hypothesis}: empirical constant {empirical:.6g} exceeds declared {declared:.6g}")
        self.hypothesis = hypothesis
        self.empirical = empirical
        self.declared = declared


@dataclass(frozen=True, eq=False)
class NoiseModel:
    grid: GridSpec
    kind: str
    coeffs: np.ndarray
    a: float = 1.0
    b: float = 0.0
    modes: np.ndarray = field(init=False, repr=False)
    wavevectors: list = field(init=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"noise.kind must be one of {KINDS}, got {self.kind!r}")
        c = np.asarray(self.coeffs, dtype=float).ravel()
        if c.size == 0 or np.any(~(c > 0)):
            raise ValueError("noise coefficients must be positive")
        if self.kind == "additive_diagonal" and self.b != 0:
            raise ValueError("additive_diagonal noise needs b = 0")
        modes, waves = divfree_modes(self.grid, c.size)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "wavevectors", waves)

    @classmethod
    def build(cls, grid: GridSpec, kind: str = "additive_diagonal", K_max: int = 8, c_decay: float = 1.0,
              amplitude: float = 1.0, a: float = 1.0, b: float | None = None, coeffs=None) -> "NoiseModel":
        """c_k = amplitude * k^(-c_decay), k = 1..K_max, unless ``coeffs`` is given."""
        if coeffs is None:
            if K_max < 1:
                raise ValueError("noise.K_max must be >= 1")
            coeffs = amplitude * np.arange(1, K_max + 1, dtype=float) ** (-c_decay)
        if b is None:
            b = 0.0 if kind == "additive_diagonal" else 1.0
        return cls(grid, kind, np.asarray(coeffs, dtype=float), a, b)

    @property
    def K_max(self) -> int:
        return self.coeffs.size

    @property
    def additive(self) -> bool:
        return self.b == 0

    # --- state-dependent pieces -------------------------------------------------

    def modal(self, c: np.ndarray) -> np.ndarray:
        """z_k = (u, phi_k) for coefficient arrays with leading batch axes; shape (..., K)."""
        flat = c.reshape(c.shape[: c.ndim - self.grid.d - 1] + (-1,))
        return self.grid.volume * np.real(flat @ np.conj(self.modes.reshape(self.K_max, -1)).T)

    def amplitudes(self, c: np.ndarray) -> np.ndarray:
        """s_k(u) = c_k (a + b z_k), so sigma_k(u) = s_k(u) phi_k."""
        if self.additive:
            shape = c.shape[: c.ndim - self.grid.d - 1] + (self.K_max,)
            return np.broadcast_to(self.a * self.coeffs, shape)
        return self.coeffs * (self.a + self.b * self.modal(c))

    def sigma(self, c: np.ndarray) -> np.ndarray:
        """All sigma_k(u) as fields, shape (..., K, d, n, ..., n)."""
        s = self.amplitudes(c)
        return s.reshape(s.shape + (1,) * (self.grid.d + 1)) * self.modes

    def apply(self, c: np.ndarray, dW: np.ndarray) -> np.ndarray:
        """sum_k sigma_k(u) dW_k for batched u (..., d, n..) and dW (..., K)."""
        w = self.amplitudes(c) * dW
        out = w @ self.modes.reshape(self.K_max, -1)
        return out.reshape(w.shape[:-1] + self.modes.shape[1:])

    def ito_correction(self, c: np.ndarray) -> np.ndarray:
        """sum_k ||sigma_k(u)||_H^2."""
        return np.sum(self.amplitudes(c) ** 2, axis=-1)

    def pairing_with(self, c: np.ndarray) -> np.ndarray:
        """(sigma_k(u), u) for each k; shape (..., K)."""
        return self.amplitudes(c) * self.modal(c)

    # --- declared constants -----------------------------------------------------

    def _mode_norm2(self, which: str, exponent: float | None = None) -> np.ndarray:
        g = self.grid
        if which == "V2":
            return g.volume * np.sum(g.k2 * np.abs(self.modes) ** 2, axis=tuple(range(1, g.d + 2)))
        if which == "Vp":
            G = to_padded(g, grad_coeffs(g, self.modes))
            return quad(g, frob2(G, g.d) ** (0.5 * exponent)) ** (2.0 / exponent)
        if which == "Lr":
            U = to_padded(g, self.modes)
            return quad(g, vec2(U, g.d) ** (0.5 * exponent)) ** (2.0 / exponent)
        raise ValueError(which)

    @property
    def K(self) -> float:
        return 2 * max(self.a**2, self.b**2) * float(np.sum(self.coeffs**2))

    @property
    def L(self) -> float:
        return self.b**2 * float(np.max(self.coeffs**2))

    def K_hat(self, which: str = "V2", exponent: float | None = None) -> float:
        base = 2 * max(self.a**2, self.b**2)
        if which == "V2":
            return base * float(np.sum(self.coeffs**2 * self._mode_norm2("V2")))
        if exponent is None or exponent < 2:
            raise ValueError(f"{which} constant needs an exponent >= 2")
        embed = max(1.0, self.grid.volume ** (1 - 2 / exponent))
        return base * embed * float(np.sum(self.coeffs**2 * self._mode_norm2(which, exponent)))

    def describe(self) -> dict:
        return {"kind": self.kind, "K_max": self.K_max, "a": self.a, "b": self.b,
                "coeffs": self.coeffs.tolist(), "wavevectors": [list(q) for q in self.wavevectors]}


# ----------------------------------------------------------------------------


def _norm2_batch(grid, c, which, exponent=None):
    axes = tuple(range(-grid.d - 1, 0))
    if which == "H":
        return grid.volume * np.sum(np.abs(c) ** 2, axis=axes)
    if which == "V2":
        return grid.volume * np.sum(grid.k2 * np.abs(c) ** 2, axis=axes)
    if which == "Vp":
        G = to_padded(grid, grad_coeffs(grid, c))
        return quad(grid, frob2(G, grid.d) ** (0.5 * exponent)) ** (2.0 / exponent)
    if which == "Lr":
        return quad(grid, vec2(to_padded(grid, c), grid.d) ** (0.5 * exponent)) ** (2.0 / exponent)
    raise ValueError(which)


@dataclass
class NoiseReport:
    empirical: dict
    declared: dict
    passed: dict
    samples: int

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def to_dict(self) -> dict:
        return {"samples": self.samples, "empirical": self.empirical, "declared": self.declared,
                "passed": self.passed, "ok": self.ok}


def validate_hypotheses(noise: NoiseModel, n_samples: int = 1000, grid: GridSpec | None = None, p: float = 3.0,
                        r: float = 6.0, seed: int = 0, raise_on_violation: bool = True,
                        batch: int = 100) -> NoiseReport:
    """Empirical suprema of the growth and Lipschitz ratios over random fields.

    The sigma_k(u) are built as fields and normed by quadrature, independently
    of the closed forms behind the declared constants.  u = 0 is always
    included.
    """
    grid = noise.grid if grid is None else grid
    if grid != noise.grid:
        raise ValueError("grid does not match the noise model")
    names = ["H1", "H2", "H3_V2", f"H3_Vp(p={p:g})", f"H3_Lr(r={r:g})"]
    emp = dict.fromkeys(names, 0.0)
    for start in range(0, n_samples, batch):
        m = min(batch, n_samples - start)
        u = np.empty((m, grid.d) + grid.shape, dtype=complex)
        v = np.empty_like(u)
        for j in range(m):
            rng = stream(seed, start + j, 31)
            s = rng.uniform(1.0, 3.0)
            u[j] = random_coeffs(grid, rng, s=s, a=10.0 ** rng.uniform(-2, 2))
            v[j] = random_coeffs(grid, rng, s=s, a=10.0 ** rng.uniform(-2, 2))
        if start == 0:
            u[0] = 0.0
        su, sv = noise.sigma(u), noise.sigma(v)
        for which, key, e in [("H", "H1", None), ("V2", "H3_V2", None), ("Vp", names[3], p), ("Lr", names[4], r)]:
            lhs = np.sum(_norm2_batch(grid, su, which, e), axis=-1)
            ratio = lhs / (1.0 + _norm2_batch(grid, u, which, e))
            emp[key] = max(emp[key], float(np.max(ratio)))
        diff = np.sum(_norm2_batch(grid, su - sv, "H"), axis=-1)
        den = _norm2_batch(grid, u - v, "H")
        ok = den > 0
        if np.any(ok):
            emp["H2"] = max(emp["H2"], float(np.max(diff[ok] / den[ok])))
    declared = {"H1": noise.K, "H2": noise.L, "H3_V2": noise.K_hat("V2"),
                names[3]: noise.K_hat("Vp", p), names[4]: noise.K_hat("Lr", r)}
    slack = 1e-12
    passed = {k: emp[k] <= declared[k] * (1 + slack) + slack for k in names}
    report = NoiseReport(emp, declared, passed, n_samples)
    if raise_on_violation:
        for k in names:
            if not passed[k]:
                raise HypothesisViolation(k, emp[k], declared[k])
    return report
