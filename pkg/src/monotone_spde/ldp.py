"""Small-time large deviations: rare-event estimates, skeleton ODE, rate functionals."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import norm as _normal

from .field_space import GridSpec, SpectralField
from .noise import NoiseModel
from .simulator import EnsembleSpec, IntegrationError, run_ensemble

Z95 = float(_normal.ppf(0.975))


def wilson_interval(hits: int, n: int, z: float = Z95) -> tuple:
    if n <= 0:
        raise ValueError("n must be positive")
    p = hits / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def _log(x):
    return math.log(x) if x > 0 else -math.inf


@dataclass
class LdpEstimate:
    """Rows: (scale, n, hits, p_hat, ci_lo, ci_hi, scaled log p with CI ends).

    ``scale`` is eps for the rescaled events and t for the Varadhan scan; the
    log column is ``factor * scale * log p_hat`` (factor 1 or 2).  Zero hits
    are flagged: the point value is -inf and only the upper CI end is finite.
    """

    event: str
    factor: float = 1.0
    rows: list = field(default_factory=list)

    def add(self, scale: float, n: int, hits: int, **extra):
        lo, hi = wilson_interval(hits, n)
        f = self.factor * scale
        self.rows.append({"eps": float(scale), "n": int(n), "hits": int(hits), "p_hat": hits / n,
                          "ci_lo": lo, "ci_hi": hi, "eps_log_p": f * _log(hits / n),
                          "eps_log_lo": f * _log(lo), "eps_log_hi": f * _log(hi),
                          "flagged": hits == 0, **extra})

    def column(self, key: str) -> np.ndarray:
        return np.array([r[key] for r in self.rows], dtype=float)

    def strictly_decreasing(self) -> bool:
        """Scaled log p decreasing along the rows with pairwise disjoint CIs."""
        r = self.rows
        return all(b["eps_log_hi"] < a["eps_log_lo"] for a, b in zip(r, r[1:]))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        keys = ["eps", "n", "hits", "p_hat", "ci_lo", "ci_hi", "eps_log_p"]
        extra = [k for k in (self.rows[0] if self.rows else {}) if k not in keys + ["eps_log_lo", "eps_log_hi", "flagged"]]
        w.writerow(keys + extra)
        for row in self.rows:
            w.writerow([repr(row[k]) if isinstance(row[k], float) else row[k] for k in keys + extra])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"event": self.event, "factor": self.factor, "rows": self.rows}


# ----------------------------------------------------------------------------
# Monte Carlo events


def _check_eps_list(eps_list):
    eps = [float(e) for e in eps_list]
    if not eps or any(not 0 < e for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("ldp.eps_list must be positive and strictly decreasing")
    return eps


def estimate_equivalence_gap(eps_list, delta, n_paths: int, spec: EnsembleSpec, workers: int = 1):
    """P{max_i ||u^eps(t_i) - v^eps(t_i)||_H^2 > delta} on shared increments.

    ``delta`` may be a list; the same paths serve every threshold, so the
    estimates are nonincreasing in delta.  Returns one LdpEstimate per delta
    (a single one when delta is a scalar).
    """
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))
    if np.any(~(deltas > 0)):
        raise ValueError("ldp.delta must be positive")
    if spec.noise is None:
        raise ValueError("the comparison process needs noise")
    out = [LdpEstimate(f"sup gap^2 > {x:g}") for x in deltas]
    for j, eps in enumerate(_check_eps_list(eps_list)):
        if eps > 1:
            raise ValueError("ldp.eps_list entries must be <= 1")
        res = run_ensemble(replace(spec, eps=eps, eps_index=j, drift=True), n_paths, ("gap",), workers)
        for est, x in zip(out, deltas):
            est.add(eps, n_paths, int(np.sum(res["gap_sup"] > x)))
    return out if np.ndim(delta) else out[0]


def estimate_energy_exit(eps_list, M, n_paths: int, spec: EnsembleSpec, workers: int = 1):
    """P{sup ||u||^2 + eps mu int ||u||_V2^2 + (eps mu / 2) int ||u||_Vp^p + eps beta int ||u||_r^r > M}."""
    Ms = np.atleast_1d(np.asarray(M, dtype=float))
    out = [LdpEstimate(f"energy functional > {m:g}") for m in Ms]
    for j, eps in enumerate(_check_eps_list(eps_list)):
        if eps > 1:
            raise ValueError("ldp.eps_list entries must be <= 1")
        res = run_ensemble(replace(spec, eps=eps, eps_index=j, drift=True), n_paths, ("exit",), workers)
        for est, m in zip(out, Ms):
            est.add(eps, n_paths, int(np.sum(res["exit_functional"] > m)))
    return out if np.ndim(M) else out[0]


def estimate_gaussian_exit(eps_list, rho: float, n_paths: int, spec: EnsembleSpec, workers: int = 1) -> LdpEstimate:
    """P{||v^eps(T) - u0||_H >= rho} for the drift-free comparison process."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    est = LdpEstimate(f"||v(T) - u0|| >= {rho:g}")
    for j, eps in enumerate(_check_eps_list(eps_list)):
        res = run_ensemble(replace(spec, eps=eps, eps_index=j, drift=False), n_paths, (), workers)
        est.add(eps, n_paths, int(np.sum(res["final_dev2"] >= rho * rho)))
    return est


def estimate_varadhan(t_list, center2: SpectralField, rho2: float, n_paths: int, spec: EnsembleSpec,
                      workers: int = 1) -> LdpEstimate:
    """2t log P{u(t) in ball(center2, rho2)} started from the point mass spec.u0.

    Drift-free when ``spec.drift`` is False.  Exploratory: no reference value.
    """
    ts = [float(t) for t in t_list]
    if any(not t > 0 for t in ts):
        raise ValueError("times must be positive")
    if spec.drift:
        raise ValueError("the Varadhan scan is implemented for the drift-free process")
    est = LdpEstimate(f"u(t) in ball(center, {rho2:g})", factor=2.0)
    target = center2.coeffs
    for j, t in enumerate(ts):
        sub = replace(spec, T=t, eps=1.0, eps_index=j)
        res = run_ensemble(sub, n_paths, (), workers)
        final = spec.u0 + np.tensordot(res["final_modal"] - spec.noise.modal(spec.u0),
                                       spec.noise.modes, axes=(-1, 0))
        d2 = spec.grid.volume * np.sum(np.abs(final - target) ** 2, axis=tuple(range(1, final.ndim)))
        est.add(t, n_paths, int(np.sum(d2 <= rho2 * rho2)))
    return est


# ----------------------------------------------------------------------------
# controls, skeleton and rate functionals


@dataclass(frozen=True, eq=False)
class ControlPath:
    """Piecewise-linear h_k with h_k(0) = 0: slopes hdot[j, k] on [times[j], times[j+1]]."""

    times: np.ndarray
    hdot: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        hd = np.atleast_2d(np.asarray(self.hdot, dtype=float))
        if t.ndim != 1 or t.size < 2 or t[0] != 0 or np.any(np.diff(t) <= 0):
            raise ValueError("control times must start at 0 and increase")
        if hd.shape[0] != t.size - 1:
            raise ValueError("one slope row per segment is required")
        if not np.all(np.isfinite(hd)):
            raise ValueError("control slopes must be finite")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "hdot", hd)

    @classmethod
    def from_values(cls, times, h) -> "ControlPath":
        h = np.asarray(h, dtype=float)
        if np.any(h[0] != 0):
            raise ValueError("controls start at h(0) = 0")
        return cls(times, np.diff(h, axis=0) / np.diff(np.asarray(times, dtype=float))[:, None])

    @classmethod
    def random(cls, K: int, T: float, segments: int, rng: np.random.Generator, scale: float = 1.0) -> "ControlPath":
        cuts = np.sort(rng.uniform(0, T, segments - 1))
        times = np.concatenate([[0.0], cuts, [T]])
        return cls(times, scale * rng.standard_normal((segments, K)))

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def K(self) -> int:
        return self.hdot.shape[1]

    def values(self) -> np.ndarray:
        return np.vstack([np.zeros(self.K), np.cumsum(self.hdot * np.diff(self.times)[:, None], axis=0)])


def action_functional(h: ControlPath) -> float:
    """I(h) = 1/2 sum_k int_0^T hdot_k^2 dt, exact for piecewise-constant slopes."""
    return 0.5 * float(np.sum(h.hdot**2 * np.diff(h.times)[:, None]))


@dataclass
class SkeletonPath:
    t: np.ndarray
    modal: np.ndarray
    coeffs: np.ndarray


def skeleton_solve(h: ControlPath, u0: SpectralField, noise: NoiseModel, dt: float) -> SkeletonPath:
    """RK4 for du/dt = sum_k sigma_k(u) hdot_k(t).

    The right-hand side lies in span{phi_k} and depends on u only through
    z_k = (u, phi_k), so the ODE is integrated for z; every control segment is
    split into equal substeps of length <= dt so hdot is constant within a step.
    """
    if h.K != noise.K_max:
        raise ValueError(f"control has {h.K} components, noise has {noise.K_max}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    c, a, b = noise.coeffs, noise.a, noise.b
    z0 = noise.modal(u0.coeffs)
    ts, zs = [0.0], [z0]
    z = z0.copy()
    for j in range(h.hdot.shape[0]):
        t0, t1 = h.times[j], h.times[j + 1]
        m = max(1, math.ceil((t1 - t0) / dt - 1e-12))
        tau = (t1 - t0) / m
        g = c * h.hdot[j]

        def rhs(x):
            return g * (a + b * x)

        for i in range(m):
            k1 = rhs(z)
            k2 = rhs(z + 0.5 * tau * k1)
            k3 = rhs(z + 0.5 * tau * k2)
            k4 = rhs(z + tau * k3)
            z = z + tau / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(z)):
                raise IntegrationError(len(ts) - 1)
            ts.append(t0 + (i + 1) * tau)
            zs.append(z)
    modal = np.array(zs)
    shift = np.tensordot(modal - z0, noise.modes, axes=(-1, 0))
    return SkeletonPath(np.array(ts), modal, u0.coeffs + shift)


def rate_function_diagonal(t, coeffs, u0: SpectralField, noise: NoiseModel, tol: float = 1e-10) -> float:
    """R(g) for a discrete path g(t_i) = coeffs[i] under additive diagonal noise.

    The control is unique: hdot_k = (d/dt)(g, phi_k) / (a c_k), linear between
    samples.  Returns +inf when g(0) != u0 or g - u0 leaves span{phi_k}
    (relative tolerance ``tol``).
    """
    if not noise.additive:
        raise ValueError("rate_function_diagonal needs additive noise (b = 0)")
    t = np.asarray(t, dtype=float)
    coeffs = np.asarray(coeffs)
    if t.size != coeffs.shape[0] or t.size < 1:
        raise ValueError("one field per time is required")
    scale = max(1.0, float(np.max(np.abs(coeffs))))
    if np.max(np.abs(coeffs[0] - u0.coeffs)) > tol * scale:
        return math.inf
    z = noise.modal(coeffs)
    z0 = noise.modal(u0.coeffs)
    inspan = u0.coeffs + np.tensordot(z - z0, noise.modes, axes=(-1, 0))
    if np.max(np.abs(coeffs - inspan)) > tol * scale:
        return math.inf
    if t.size == 1:
        return 0.0
    dtv = np.diff(t)
    hdot = np.diff(z, axis=0) / dtv[:, None] / (noise.a * noise.coeffs)
    return 0.5 * float(np.sum(hdot**2 * dtv[:, None]))


def gaussian_reference_rate(rho: float, T: float, noise: NoiseModel) -> float:
    """rho^2 / (2 T max_k (a c_k)^2): cheapest escape of the drift-free additive process."""
    if not noise.additive:
        raise ValueError("the Gaussian reference rate needs additive noise")
    if rho < 0 or not T > 0:
        raise ValueError("rho must be >= 0 and T > 0")
    return rho * rho / (2 * T * float(np.max((noise.a * noise.coeffs) ** 2)))


def single_wavevector_noise(grid: GridSpec, c: float) -> NoiseModel:
    """Additive noise on the cos and sin modes of the lowest wavevector, both with amplitude c."""
    return NoiseModel(grid, "additive_diagonal", np.array([c, c]), 1.0, 0.0)
