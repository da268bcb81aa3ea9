"""Randomised numerical certification of the operator inequalities.

Every check evaluates the two sides of an inequality ``lhs >= rhs`` on a batch
of sampled fields.  A sample passes when

    lhs - rhs >= -tol * max(|lhs|, |rhs|, 1e-30).

All pairings are padded-grid quadratures, which equal the spectral pairings of
the projected operators exactly (discrete Parseval), so the pointwise
inequalities behind each estimate hold up to rounding.

Each check also carries a *canary*: the same samples with the load-bearing
constant weakened by a factor 10 (e.g. eta/10).  A canary that never fires
means the check is too weak to notice a wrong constant.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .field_space import (
    GridSpec,
    SpectralField,
    divfree_modes,
    frob2,
    grad_coeffs,
    quad,
    random_coeffs,
    to_padded,
    vec2,
)
from .operators import (
    PhysParams,
    Regime,
    constant_eta,
    constant_eta_tilde,
    damping_padded,
    drift_coeffs,
    op_A_coeffs,
    op_B_coeffs,
    trilinear_coeffs,
    viscous_flux,
)
from .rng import stream

TOL = 1e-9
CANARY_FACTOR = 10.0


@dataclass
class CheckReport:
    name: str
    samples: int
    violations: int
    worst_margin: float  # lhs - rhs of the sample with the lowest relative margin
    worst_relative: float
    worst_scale: float
    worst_seed: list | None  # [master seed, sample index]
    passed: bool
    tol: float = TOL
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)

    @property
    def violation_fraction(self) -> float:
        return self.violations / self.samples if self.samples else 0.0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["violation_fraction"] = self.violation_fraction
        return d


class _Acc:
    """Streaming accumulator of one inequality over batches."""

    def __init__(self, tol):
        self.tol = tol
        self.n = 0
        self.violations = 0
        self.worst = (math.inf, 0.0, 1.0, None)

    def add(self, lhs, rhs, index=None):
        lhs = np.atleast_1d(np.asarray(lhs, dtype=float))
        rhs = np.atleast_1d(np.asarray(rhs, dtype=float))
        margin = lhs - rhs
        scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-30)
        rel = margin / scale
        self.n += margin.size
        self.violations += int(np.count_nonzero(rel < -self.tol))
        j = int(np.argmin(rel))
        if rel[j] < self.worst[0]:
            idx = None if index is None else int(np.atleast_1d(index)[j])
            self.worst = (float(rel[j]), float(margin[j]), float(scale[j]), idx)

    def summary(self) -> dict:
        return {"samples": self.n, "violations": self.violations,
                "worst_relative": self.worst[0], "worst_margin": self.worst[1]}


def _build_report(name, forms: dict, seed, params, tol, details=None) -> CheckReport:
    """Merge per-form accumulators; the first form is the headline inequality."""
    accs = list(forms.values())
    worst = min(accs, key=lambda a: a.worst[0])
    rel, margin, scale, idx = worst.worst
    det = {k: a.summary() for k, a in forms.items()} if len(forms) > 1 else {}
    det.update(details or {})
    return CheckReport(
        name=name,
        samples=accs[0].n,
        violations=int(max(a.violations for a in accs)),
        worst_margin=margin,
        worst_relative=rel,
        worst_scale=scale,
        worst_seed=None if idx is None else [seed, idx],
        passed=all(a.violations == 0 for a in accs),
        tol=tol,
        params=dict(params),
        details=det,
    )


# ----------------------------------------------------------------------------
# batched sides of each inequality; every function returns {form: (lhs, rhs)}
# with "canary" holding the weakened-constant variant


def _h2(grid, c):
    return grid.volume * np.sum(np.abs(c) ** 2, axis=tuple(range(-grid.d - 1, 0)))


def _v2(grid, c):
    return grid.volume * np.sum(grid.k2 * np.abs(c) ** 2, axis=tuple(range(-grid.d - 1, 0)))


def _dot_vec(grid, X, Y):
    return np.sum(X * Y, axis=-grid.d - 1)


def _dot_mat(grid, X, Y):
    return np.sum(X * Y, axis=(-grid.d - 2, -grid.d - 1))


def strong_monotonicity_constant(p: float) -> float:
    """Constant in front of ||u-v||_Vp^p; 1/4 replaces 2^-(p-1) for 2 <= p < 3."""
    return 2.0 ** (-(p - 1)) if p >= 3 else 0.25


def c_lower_constant(r: float) -> float:
    """Constant in front of ||u-v||_Lr^r; the r < 3 branch uses the relaxed interpolation."""
    if r == 2:
        return 1.0
    return 2.0 ** (-(r - 2)) if r >= 3 else 0.5


def sides_coercivity(grid, cu, p):
    G = to_padded(grid, grad_coeffs(grid, cu))
    g2 = frob2(G, grid.d)
    weighted = quad(grid, (1.0 + g2) ** (0.5 * (p - 2)) * g2)
    rhs = quad(grid, g2) + quad(grid, g2 ** (0.5 * p))
    return {"main": (2.0 * weighted, rhs), "canary": (2.0 / CANARY_FACTOR * weighted, rhs)}


def sides_A_strong(grid, cu, cv, p):
    cw = cu - cv
    Gu, Fu = viscous_flux(grid, cu, p)
    Gv, Fv = viscous_flux(grid, cv, p)
    Gw = Gu - Gv
    pair = quad(grid, _dot_mat(grid, Fu - Fv, Gw))
    gw2 = frob2(Gw, grid.d)
    v2 = quad(grid, gw2)
    vp = quad(grid, gw2 ** (0.5 * p))
    c = strong_monotonicity_constant(p)
    wu = quad(grid, frob2(Gu, grid.d) ** (0.5 * (p - 2)) * gw2)
    wv = quad(grid, frob2(Gv, grid.d) ** (0.5 * (p - 2)) * gw2)
    f = CANARY_FACTOR
    return {
        "main": (pair, 0.5 * v2 + c * vp),
        "intermediate": (pair, 0.5 * v2 + 0.25 * wu + 0.25 * wv),
        "canary": (pair, f * (0.5 * v2 + c * vp)),
    }


def sides_C_monotonicity(grid, cu, cv, r):
    U, V = to_padded(grid, cu), to_padded(grid, cv)
    W = U - V
    pair = quad(grid, _dot_vec(grid, damping_padded(grid, cu, r) - damping_padded(grid, cv, r), W))
    w2 = vec2(W, grid.d)
    weighted = 0.5 * quad(grid, vec2(U, grid.d) ** (0.5 * (r - 2)) * w2) \
        + 0.5 * quad(grid, vec2(V, grid.d) ** (0.5 * (r - 2)) * w2)
    lr = c_lower_constant(r) * quad(grid, w2 ** (0.5 * r))
    f = CANARY_FACTOR
    return {"weighted": (pair, weighted), "Lr": (pair, lr), "canary": (pair, f * lr)}


def _lr_norm(grid, c, r):
    return quad(grid, vec2(to_padded(grid, c), grid.d) ** (0.5 * r)) ** (1.0 / r)


def sides_C_lipschitz(grid, cu, cv, cw, r):
    W = to_padded(grid, cw)
    lhs = np.abs(quad(grid, _dot_vec(grid, damping_padded(grid, cu, r) - damping_padded(grid, cv, r), W)))
    nu, nv = _lr_norm(grid, cu, r), _lr_norm(grid, cv, r)
    bound = (r - 1) * (nu + nv) ** (r - 2) * _lr_norm(grid, cu - cv, r) * _lr_norm(grid, cw, r)
    return {"main": (bound, lhs), "canary": (bound / CANARY_FACTOR, lhs)}


def sides_B_interpolation(grid, cu, cv, r):
    lhs = np.abs(trilinear_coeffs(grid, cu, cv, cu))
    bound = _lr_norm(grid, cu, r) ** (r / (r - 2)) * np.sqrt(_h2(grid, cu)) ** ((r - 4) / (r - 2)) \
        * np.sqrt(_v2(grid, cv))
    return {"main": (bound, lhs), "canary": (bound / CANARY_FACTOR, lhs)}


def _drift_pair(grid, cu, cv, params):
    cw = cu - cv
    dG = drift_coeffs(grid, cu, params) - drift_coeffs(grid, cv, params)
    return grid.volume * np.real(np.sum(np.conj(dG) * cw, axis=tuple(range(-grid.d - 1, 0)))), cw


def sides_global(grid, cu, cv, params: PhysParams):
    pair, cw = _drift_pair(grid, cu, cv, params)
    h2 = _h2(grid, cw)
    if params.r > 4:
        eta = constant_eta(params)
        return {
            "main": (pair, -eta * h2),
            "strong": (pair + eta * h2, 0.5 * params.mu * _v2(grid, cw)),
            "canary": (pair, -eta / CANARY_FACTOR * h2),
        }
    # r = 4 boundary: no shift, surplus 1/2 (beta - 1/(2 mu)) ||v w||^2
    vw = quad(grid, vec2(to_padded(grid, cv), grid.d) * vec2(to_padded(grid, cw), grid.d))
    return {
        "main": (pair, np.zeros_like(pair)),
        "strong": (pair, 0.5 * (params.beta - 0.5 / params.mu) * vw),
    }


def sides_local(grid, cu, cv, params: PhysParams, c_gn: float):
    pair, cw = _drift_pair(grid, cu, cv, params)
    eta_t = constant_eta_tilde(params, c_gn)
    p, d = params.p, params.d
    gv2 = frob2(to_padded(grid, grad_coeffs(grid, cv)), grid.d)
    vp = quad(grid, gv2 ** (0.5 * p)) ** (1.0 / p)
    weight = vp ** (2 * p / (2 * p - d)) * _h2(grid, cw)
    return {
        "main": (pair, -eta_t * weight),
        "strong": (pair + eta_t * weight, 0.5 * params.mu * _v2(grid, cw)),
        "canary": (pair, -eta_t / CANARY_FACTOR * weight),
    }


# ----------------------------------------------------------------------------
# single-call API


def _stack(fields):
    if isinstance(fields, SpectralField):
        return fields.grid, fields.coeffs[None]
    fields = list(fields)
    grid = fields[0].grid
    for f in fields:
        if f.grid != grid:
            raise ValueError("fields live on different grids")
    return grid, np.stack([f.coeffs for f in fields])


def _evaluate(name, sides_fn, args, params, tol, n_fields):
    grids_arrays = [_stack(a) for a in args[:n_fields]]
    grid = grids_arrays[0][0]
    arrays = [ga[1] for ga in grids_arrays]
    forms = sides_fn(grid, *arrays, *args[n_fields:])
    accs = {}
    for k, (lhs, rhs) in forms.items():
        if k == "canary":
            continue
        accs[k] = _Acc(tol)
        accs[k].add(lhs, rhs, np.arange(arrays[0].shape[0]))
    return _build_report(name, accs, None, params, tol)


def check_coercivity(u, p: float, tol: float = TOL) -> CheckReport:
    """2 <(1+|grad u|^2)^((p-2)/2) grad u, grad u> >= ||grad u||^2 + ||grad u||_Lp^p."""
    if p < 2:
        raise ValueError("p must be >= 2")
    return _evaluate("coercivity", sides_coercivity, (u, p), {"p": p}, tol, 1)


def check_A_strong_monotonicity(u, v, p: float, tol: float = TOL) -> CheckReport:
    """<A(u)-A(v), u-v> >= 1/2 ||u-v||_V2^2 + c_p ||u-v||_Vp^p, plus the weighted intermediate form."""
    if p < 2:
        raise ValueError("p must be >= 2")
    return _evaluate("A_strong_monotonicity", sides_A_strong, (u, v, p), {"p": p}, tol, 2)


def check_C_monotonicity(u, v, r: float, tol: float = TOL) -> CheckReport:
    if r < 2:
        raise ValueError("r must be >= 2")
    return _evaluate("C_monotonicity", sides_C_monotonicity, (u, v, r), {"r": r}, tol, 2)


def check_C_lipschitz(u, v, w, r: float, tol: float = TOL) -> CheckReport:
    if r < 2:
        raise ValueError("r must be >= 2")
    return _evaluate("C_lipschitz", sides_C_lipschitz, (u, v, w, r), {"r": r}, tol, 3)


def check_B_interpolation_bound(u, v, r: float, tol: float = TOL) -> CheckReport:
    if r <= 4:
        raise ValueError(f"the interpolation bound needs r > 4, got r = {r}")
    return _evaluate("B_interpolation", sides_B_interpolation, (u, v, r), {"r": r}, tol, 2)


def check_global_monotonicity(u, v, params: PhysParams, tol: float = TOL) -> CheckReport:
    if params.regime is not Regime.GLOBAL:
        raise ValueError(f"global monotonicity needs the GLOBAL regime, params are {params.regime.value}")
    return _evaluate("global_monotonicity", sides_global, (u, v, params), asdict(params), tol, 2)


def check_local_monotonicity(u, v, params: PhysParams, c_gn: float, tol: float = TOL) -> CheckReport:
    if not params.locally_monotone:
        raise ValueError("local monotonicity needs p >= d/2 + 1 and r >= 2")
    return _evaluate("local_monotonicity", sides_local, (u, v, params, c_gn),
                     {**asdict(params), "c_gn": c_gn}, tol, 2)


# ----------------------------------------------------------------------------
# Gagliardo-Nirenberg constant


def gn_ratio(grid: GridSpec, c: np.ndarray, p: float) -> np.ndarray:
    """||w||_{L^q}^2 / (||w||_V2^(d/p) ||w||_H^((2p-d)/p)), q = 2p/(p-1); batched."""
    d = grid.d
    q = 2 * p / (p - 1)
    lq2 = quad(grid, vec2(to_padded(grid, c), d) ** (0.5 * q)) ** (2.0 / q)
    den = np.sqrt(_v2(grid, c)) ** (d / p) * np.sqrt(_h2(grid, c)) ** ((2 * p - d) / p)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den > 0, lq2 / np.where(den > 0, den, 1.0), np.nan)


def estimate_gn_constant(grid: GridSpec, p: float, d: int | None = None, n_samples: int = 256,
                         n_opt_steps: int = 200, seed: int = 0) -> float:
    """Sampled lower bound of the discrete Gagliardo-Nirenberg constant.

    Random fields (spectral decay 1-3) are scored, then the best one is refined
    by coordinate ascent along real divergence-free Fourier modes.  The caller
    applies the safety factor.
    """
    d = grid.d if d is None else d
    if d != grid.d:
        raise ValueError("d must match the grid dimension")
    if p <= d / 2:
        raise ValueError(f"p must exceed d/2, got p = {p}")
    modes, _ = divfree_modes(grid)
    # single modes beat typical random fields, so they seed the pool too
    ratios = gn_ratio(grid, modes, p)
    j = int(np.nanargmax(ratios))
    best, best_c = float(ratios[j]), modes[j]
    for i in range(n_samples):
        rng = stream(seed, i, 71)
        c = random_coeffs(grid, rng, s=rng.uniform(0.0, 3.0))[None]
        ratio = gn_ratio(grid, c, p)[0]
        if np.isfinite(ratio) and ratio > best:
            best, best_c = float(ratio), c[0]
    steps = np.concatenate([-np.logspace(-3, 0, 8), np.logspace(-3, 0, 8)])
    rng = stream(seed, 0, 72)
    for _ in range(n_opt_steps):
        j = rng.integers(len(modes))
        h = np.sqrt(_h2(grid, best_c))
        trial = best_c[None] + (steps * h)[:, None, None, None] * modes[j][None]
        ratios = gn_ratio(grid, trial, p)
        k = int(np.nanargmax(ratios))
        if ratios[k] > best:
            best, best_c = float(ratios[k]), trial[k]
    return float(best)


# ----------------------------------------------------------------------------
# hemicontinuity


def check_hemicontinuity(u: SpectralField, w: SpectralField, v: SpectralField, params: PhysParams,
                         lambda_grid: Sequence[float] = tuple(2.0 ** -np.arange(1, 13)),
                         slack: float = 1.2, tol: float = TOL) -> CheckReport:
    """Line-segment continuity of lambda -> <G(u + lambda w), v> at 0.

    Each halving (or general shrink) of lambda must shrink the difference at
    least proportionally, up to ``slack``.  For p = 2, beta = 0 the difference
    is a quadratic polynomial in lambda; its fitted slope is reported alongside
    the exact derivative <mu A w + B(u, w) + B(w, u), v>.
    """
    lam = np.asarray(lambda_grid, dtype=float)
    if lam.ndim != 1 or lam.size < 2 or np.any(np.diff(lam) >= 0) or np.any(lam <= 0):
        raise ValueError("lambda_grid must be positive and strictly decreasing")
    grid = u.grid
    cu, cw, cv = u.coeffs, w.coeffs, v.coeffs
    base = drift_coeffs(grid, cu[None], params)
    moved = drift_coeffs(grid, cu[None] + lam[:, None, None, None] * cw[None], params)
    diff = grid.volume * np.real(np.sum(np.conj(moved - base) * cv, axis=(1, 2, 3)))
    acc = _Acc(tol)
    # lhs = slack * (lam_{i+1}/lam_i) |d_i| >= rhs = |d_{i+1}|
    acc.add(slack * lam[1:] / lam[:-1] * np.abs(diff[:-1]), np.abs(diff[1:]), np.arange(lam.size - 1))
    details = {"lambda": lam.tolist(), "difference": diff.tolist(),
               "modulus": float(np.max(np.abs(diff) / lam))}
    if params.p == 2 and params.beta == 0:
        fit = np.polynomial.polynomial.polyfit(lam, diff, 2)
        exact = params.mu * op_A_coeffs(grid, cw, 2) + op_B_coeffs(grid, cu, cw) + op_B_coeffs(grid, cw, cu)
        details["fitted_slope"] = float(fit[1])
        details["exact_slope"] = float(grid.volume * np.real(np.sum(np.conj(exact) * cv)))
    return _build_report("hemicontinuity", {"main": acc}, None, asdict(params), tol, details)


# ----------------------------------------------------------------------------
# suite runner


@dataclass(frozen=True)
class SuiteEntry:
    name: str
    kind: str
    params: dict
    n_fields: int


def default_entries() -> list:
    e = []
    for p in (2.5, 3.0, 4.0):
        e.append(SuiteEntry(f"coercivity[p={p:g}]", "coercivity", {"p": p}, 1))
    for p in (2.5, 3.0, 4.0, 5.0):
        e.append(SuiteEntry(f"A_strong_monotonicity[p={p:g}]", "A_strong", {"p": p}, 2))
    for r in (3.0, 4.0, 5.0, 6.0):
        e.append(SuiteEntry(f"C_monotonicity[r={r:g}]", "C_mono", {"r": r}, 2))
    for r in (3.0, 4.0, 6.0):
        e.append(SuiteEntry(f"C_lipschitz[r={r:g}]", "C_lip", {"r": r}, 3))
    for r in (5.0, 6.0, 8.0):
        e.append(SuiteEntry(f"B_interpolation[r={r:g}]", "B_interp", {"r": r}, 2))
    for r in (5.0, 6.0):
        e.append(SuiteEntry(f"global_monotonicity[r={r:g}]", "global",
                            {"mu": 1.0, "beta": 1.0, "p": 3.0, "r": r}, 2))
    e.append(SuiteEntry("global_monotonicity[r=4,2*beta*mu=1]", "global",
                        {"mu": 1.0, "beta": 0.5, "p": 3.0, "r": 4.0}, 2))
    # (p, d, r) = (2, 2, 2) is the undamped Navier-Stokes case; (3, 2, 2) keeps beta = 1
    e.append(SuiteEntry("local_monotonicity[p=2,d=2,r=2]", "local",
                        {"mu": 1.0, "beta": 0.0, "p": 2.0, "r": 2.0}, 2))
    e.append(SuiteEntry("local_monotonicity[p=3,d=2,r=2]", "local",
                        {"mu": 1.0, "beta": 1.0, "p": 3.0, "r": 2.0}, 2))
    return e


def entries_for(params: PhysParams) -> list:
    """Suite rows for one configured (mu, beta, p, r): the operator checks plus its regime's monotonicity."""
    p, r = params.p, params.r
    e = [SuiteEntry(f"coercivity[p={p:g}]", "coercivity", {"p": p}, 1),
         SuiteEntry(f"A_strong_monotonicity[p={p:g}]", "A_strong", {"p": p}, 2),
         SuiteEntry(f"C_monotonicity[r={r:g}]", "C_mono", {"r": r}, 2),
         SuiteEntry(f"C_lipschitz[r={r:g}]", "C_lip", {"r": r}, 3)]
    if r > 4:
        e.append(SuiteEntry(f"B_interpolation[r={r:g}]", "B_interp", {"r": r}, 2))
    prm = {"mu": params.mu, "beta": params.beta, "p": p, "r": r}
    tag = f"mu={params.mu:g},beta={params.beta:g},p={p:g},r={r:g}"
    if params.regime is Regime.GLOBAL:
        e.append(SuiteEntry(f"global_monotonicity[{tag}]", "global", prm, 2))
    elif params.regime is Regime.LOCAL:
        e.append(SuiteEntry(f"local_monotonicity[{tag}]", "local", prm, 2))
    return e


def sample_batch(grid: GridSpec, seed: int, indices: np.ndarray, slot: int,
                 decay=(2.0, 3.0), amp_range=(1e-2, 1e1)) -> np.ndarray:
    """One field per index from the (seed, index, slot) stream.

    Spectral decay is drawn from ``decay`` and the amplitude log-uniformly
    from ``amp_range``.
    """
    out = np.empty((len(indices), grid.d) + grid.shape, dtype=complex)
    lo, hi = np.log10(amp_range[0]), np.log10(amp_range[1])
    for j, i in enumerate(indices):
        rng = stream(seed, int(i), slot)
        s = decay[int(rng.integers(len(decay)))]
        a = 10.0 ** rng.uniform(lo, hi)
        out[j] = random_coeffs(grid, rng, s=s, a=a)
    return out


def _sides_for(entry: SuiteEntry, grid, arrays, c_gn):
    k, prm = entry.kind, entry.params
    if k == "coercivity":
        return sides_coercivity(grid, arrays[0], prm["p"])
    if k == "A_strong":
        return sides_A_strong(grid, *arrays, prm["p"])
    if k == "C_mono":
        return sides_C_monotonicity(grid, *arrays, prm["r"])
    if k == "C_lip":
        return sides_C_lipschitz(grid, *arrays, prm["r"])
    if k == "B_interp":
        return sides_B_interpolation(grid, *arrays, prm["r"])
    phys = PhysParams(d=grid.d, **prm)
    if k == "global":
        return sides_global(grid, *arrays, phys)
    if k == "local":
        return sides_local(grid, *arrays, phys, c_gn[prm["p"]])
    raise ValueError(f"unknown check kind {k!r}")


def run_entry(entry: SuiteEntry, grid: GridSpec, n_samples: int, seed: int, batch_size: int = 500,
              c_gn: dict | None = None, tol: float = TOL) -> list:
    """Run one suite entry; returns [report, canary report] (canary omitted if the entry has none)."""
    accs: dict = {}
    for start in range(0, n_samples, batch_size):
        idx = np.arange(start, min(start + batch_size, n_samples))
        arrays = [sample_batch(grid, seed, idx, slot) for slot in range(entry.n_fields)]
        for form, (lhs, rhs) in _sides_for(entry, grid, arrays, c_gn).items():
            accs.setdefault(form, _Acc(tol)).add(lhs, rhs, idx)
    canary = accs.pop("canary", None)
    params = dict(entry.params)
    if entry.kind == "local":
        params["c_gn"] = c_gn[entry.params["p"]]
    out = [_build_report(entry.name, accs, seed, params, tol)]
    if canary is not None:
        out.append(_build_report(entry.name + "/canary", {"canary": canary}, seed,
                                 {**params, "canary_factor": CANARY_FACTOR}, tol))
    return out


def gn_constants_for(entries, grid: GridSpec, seed: int, safety: float = 1.5) -> dict:
    ps = sorted({e.params["p"] for e in entries if e.kind == "local"})
    return {p: safety * estimate_gn_constant(grid, p, grid.d, seed=seed) for p in ps}


def run_suite(grid: GridSpec, n_samples: int = 10_000, seed: int = 0, entries=None,
              batch_size: int = 500, gn_safety: float = 1.5, tol: float = TOL,
              progress: Callable | None = None) -> list:
    entries = default_entries() if entries is None else entries
    c_gn = gn_constants_for(entries, grid, seed, gn_safety)
    reports = []
    for e in entries:
        reports.extend(run_entry(e, grid, n_samples, seed, batch_size, c_gn, tol))
        if progress:
            progress(reports[-1])
    return reports


def reports_to_jsonl(reports) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True) + "\n" for r in reports)


def reports_to_csv(reports) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["check", "samples", "violations", "worst_margin", "worst_relative", "worst_seed", "passed"])
    for r in reports:
        seed = "" if r.worst_seed is None else f"{r.worst_seed[0]}:{r.worst_seed[1]}"
        w.writerow([r.name, r.samples, r.violations, repr(r.worst_margin), repr(r.worst_relative),
                    seed, int(r.passed)])
    return buf.getvalue()
