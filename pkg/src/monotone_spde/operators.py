"""Nonlinear operators of the damped Ladyzhenskaya-Smagorinsky drift.

    A(u) = -P div((1 + |grad u|^2)^((p-2)/2) grad u)     (shear-dependent viscosity)
    B(u, v) = P[(u . grad) v]                           (advection)
    C(u) = P(|u|^(r-2) u)                               (Brinkman-Forchheimer damping)
    G(u) = mu A(u) + B(u, u) + beta C(u)

All pointwise nonlinearities are evaluated on the padded grid and truncated
back to the retained band.  By discrete Parseval on the padded grid this makes
every pairing <A(u), w>, <C(u), w> with a band-limited w equal to the padded
quadrature of the corresponding integrand, so the pointwise inequalities used
in the monotonicity estimates survive discretisation exactly.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

from .field_space import (
    GridSpec,
    SpectralField,
    div_coeffs,
    frob2,
    from_padded,
    grad_coeffs,
    project_coeffs,
    quad,
    refine,
    restrict,
    to_padded,
    vec2,
)


class Regime(str, enum.Enum):
    GLOBAL = "global"
    LOCAL = "local"
    NONE = "none"


@dataclass(frozen=True)
class PhysParams:
    mu: float = 1.0
    beta: float = 1.0
    p: float = 3.0
    r: float = 6.0
    d: int = 2
    alpha: float = 0.0

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"physics.mu must be > 0, got {self.mu}")
        if not self.beta >= 0:
            raise ValueError(f"physics.beta must be >= 0, got {self.beta}")
        if self.alpha != 0:
            raise ValueError("physics.alpha is fixed to 0")
        if not self.p >= 2:
            raise ValueError(f"physics.p must be >= 2, got {self.p}")
        if not self.r >= 2:
            raise ValueError(f"physics.r must be >= 2, got {self.r}")
        if self.d not in (2, 3):
            raise ValueError(f"physics.d must be 2 or 3, got {self.d}")

    @property
    def globally_monotone(self) -> bool:
        if self.beta <= 0:
            return False
        return self.r > 4 or (self.r == 4 and 2 * self.beta * self.mu >= 1)

    @property
    def locally_monotone(self) -> bool:
        return self.p >= self.d / 2 + 1 and self.r >= 2

    @property
    def regime(self) -> Regime:
        if self.globally_monotone:
            return Regime.GLOBAL
        if self.locally_monotone:
            return Regime.LOCAL
        return Regime.NONE

    def replace(self, **kw) -> "PhysParams":
        return PhysParams(**{**asdict(self), **kw})

    def as_dict(self) -> dict:
        return asdict(self)


# ----------------------------------------------------------------------------
# batched kernels on coefficient arrays


def viscous_flux(grid: GridSpec, c: np.ndarray, p: float):
    """Padded samples of grad u and of (1+|grad u|^2)^((p-2)/2) grad u."""
    G = to_padded(grid, grad_coeffs(grid, c))
    if p == 2:
        return G, G
    coef = (1.0 + frob2(G, grid.d)) ** (0.5 * (p - 2))
    return G, np.expand_dims(coef, (-grid.d - 2, -grid.d - 1)) * G


def op_A_coeffs(grid: GridSpec, c: np.ndarray, p: float) -> np.ndarray:
    if p == 2:
        return project_coeffs(grid, grid.k2 * c)
    _, F = viscous_flux(grid, c, p)
    return project_coeffs(grid, -div_coeffs(grid, from_padded(grid, F)))


def advection_padded(grid: GridSpec, cu: np.ndarray, cv: np.ndarray) -> np.ndarray:
    """Padded samples of (u . grad) v, exact for band-limited u, v when pad_factor >= 2."""
    U = to_padded(grid, cu)
    Gv = to_padded(grid, grad_coeffs(grid, cv))
    return np.sum(np.expand_dims(U, -grid.d - 1) * Gv, axis=-grid.d - 2)


def op_B_coeffs(grid: GridSpec, cu: np.ndarray, cv: np.ndarray) -> np.ndarray:
    return project_coeffs(grid, from_padded(grid, advection_padded(grid, cu, cv)))


def trilinear_coeffs(grid: GridSpec, cu, cv, cw) -> np.ndarray:
    adv = advection_padded(grid, cu, cv)
    return quad(grid, np.sum(adv * to_padded(grid, cw), axis=-grid.d - 1))


def damping_padded(grid: GridSpec, c: np.ndarray, r: float) -> np.ndarray:
    U = to_padded(grid, c)
    if r == 2:
        return U
    return np.expand_dims(vec2(U, grid.d) ** (0.5 * (r - 2)), -grid.d - 1) * U


def op_C_coeffs(grid: GridSpec, c: np.ndarray, r: float) -> np.ndarray:
    if r == 2:
        return project_coeffs(grid, c)
    return project_coeffs(grid, from_padded(grid, damping_padded(grid, c, r)))


def drift_coeffs(grid: GridSpec, c: np.ndarray, params: PhysParams) -> np.ndarray:
    out = params.mu * op_A_coeffs(grid, c, params.p) + op_B_coeffs(grid, c, c)
    if params.beta:
        out = out + params.beta * op_C_coeffs(grid, c, params.r)
    return out


# ----------------------------------------------------------------------------
# public field API


def _check_p(p):
    if p < 2:
        raise ValueError(f"p must be >= 2, got {p}")


def _check_r(r):
    if r < 2:
        raise ValueError(f"r must be >= 2, got {r}")


def _same_grid(*fields):
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("fields live on different grids")
    return g


def op_A(u: SpectralField, p: float) -> SpectralField:
    _check_p(p)
    return SpectralField(u.grid, op_A_coeffs(u.grid, u.coeffs, p))


def potential_A(u: SpectralField, p: float) -> float:
    """(1/p) int (1 + |grad u|^2)^(p/2) dx; its derivative along w is <A(u), w>."""
    _check_p(p)
    G = to_padded(u.grid, grad_coeffs(u.grid, u.coeffs))
    return float(quad(u.grid, (1.0 + frob2(G, u.grid.d)) ** (0.5 * p)) / p)


def op_B(u: SpectralField, v: SpectralField) -> SpectralField:
    g = _same_grid(u, v)
    return SpectralField(g, op_B_coeffs(g, u.coeffs, v.coeffs))


def trilinear_b(u: SpectralField, v: SpectralField, w: SpectralField) -> float:
    """b(u, v, w) = int (u . grad) v . w dx, exact on the padded grid."""
    g = _same_grid(u, v, w)
    return float(trilinear_coeffs(g, u.coeffs, v.coeffs, w.coeffs))


def op_C(u: SpectralField, r: float) -> SpectralField:
    _check_r(r)
    return SpectralField(u.grid, op_C_coeffs(u.grid, u.coeffs, r))


def potential_C(u: SpectralField, r: float) -> float:
    """(1/r) ||u||_{L^r}^r."""
    _check_r(r)
    return float(quad(u.grid, vec2(to_padded(u.grid, u.coeffs), u.grid.d) ** (0.5 * r)) / r)


def drift_G(u: SpectralField, params: PhysParams) -> SpectralField:
    """mu A(u) + B(u, u) + beta C(u); the evolution subtracts this."""
    return SpectralField(u.grid, drift_coeffs(u.grid, u.coeffs, params))


def stokes(u: SpectralField) -> SpectralField:
    return SpectralField(u.grid, u.grid.k2 * u.coeffs)


def constant_eta(params: PhysParams) -> float:
    """Shift making G + eta I monotone for r > 4.

    Uses the exponent r (the damping exponent) that the Young-inequality step
    actually produces.
    """
    mu, beta, r = params.mu, params.beta, params.r
    if r <= 4:
        raise ValueError(f"constant_eta needs r > 4, got r = {r}")
    if beta <= 0:
        raise ValueError("constant_eta needs beta > 0")
    return (r - 4) / (2 * mu * (r - 2)) * (2 / (beta * mu * (r - 2))) ** (2 / (r - 4))


def constant_eta_tilde(params: PhysParams, c_gn: float) -> float:
    """Local-monotonicity weight multiplying ||v||_Vp^(2p/(2p-d)) ||u-v||_H^2."""
    p, d, mu = params.p, params.d, params.mu
    if p <= d / 2:
        raise ValueError(f"constant_eta_tilde needs p > d/2, got p = {p}, d = {d}")
    if c_gn <= 0:
        raise ValueError("Gagliardo-Nirenberg constant must be positive")
    return c_gn ** (2 * p / (2 * p - d)) * ((2 * p - d) / (2 * p)) * (d / (mu * p)) ** (d / (2 * p - d))


def aliasing_diagnostic(u: SpectralField, op, *args) -> float:
    """Relative change of op(u) when evaluated on a grid with twice the modes.

    Exact (rounding-level) for polynomial nonlinearities; for non-integer
    exponents it measures the aliasing of the padded pointwise evaluation.
    """
    coarse = op(u, *args)
    fine = restrict(op(refine(u), *args), u.grid)
    scale = max(float(np.max(np.abs(coarse.coeffs))), 1e-300)
    return float(np.max(np.abs(fine.coeffs - coarse.coeffs)) / scale)
