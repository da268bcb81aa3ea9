"""IMEX-tamed Euler-Maruyama on the Galerkin space, ensembles and energy audit.

One step, for the time-rescaled equation with scale eps (eps = 1 is the
original equation):

    u+ = (I + dt eps mu |k|^2)^-1 [u - dt Rt + dt eps f(eps t) + sqrt(eps) sum_k sigma_k(u) dW_k]

with R = eps (mu (A(u) - Stokes u) + B(u, u) + beta C(u)) and the tamed
Rt = R / (1 + dt ||R||_H).  At p = 2 the A - Stokes part is skipped, so it is
exactly zero.

Binary field dump (little-endian):

    magic   4 bytes  b"MSPD"
    version u32      1
    n, d, K_max, N_steps   u32 each
    dt      f64
    coeffs  complex128 array of shape (N_steps + 1, d, n, ..., n), C order
    dW      float64 array of shape (N_steps, K_max), C order
"""

from __future__ import annotations

import csv
import io
import math
import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .field_space import (
    GridSpec,
    SpectralField,
    div_coeffs,
    frob2,
    from_padded,
    inner_coeffs,
    project_coeffs,
    quad,
    refine,
    restrict,
    to_padded,
    vec2,
)
from .noise import NoiseModel
from .operators import PhysParams
from .rng import stream

CHUNK = 64  # paths per batch; fixed so results never depend on the worker count
_TAG_W = 0xB0


class IntegrationError(RuntimeError):
    def __init__(self, step: int, message: str = "non-finite state"):
        super().__init__(f"{message} at step {step}")
        self.step = step


@dataclass(frozen=True, eq=False)
class Forcing:
    """Piecewise-constant forcing table: f(t) = coeffs[j] for times[j] <= t < times[j+1]."""

    times: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size != len(self.coeffs) or t.size == 0 or np.any(np.diff(t) <= 0):
            raise ValueError("forcing table needs strictly increasing times, one field per time")
        object.__setattr__(self, "times", t)

    @classmethod
    def constant(cls, f: SpectralField) -> "Forcing":
        return cls(np.array([0.0]), f.coeffs[None])

    def at(self, t: float) -> np.ndarray:
        j = max(int(np.searchsorted(self.times, t, side="right")) - 1, 0)
        return self.coeffs[j]


# ----------------------------------------------------------------------------
# one step


def _h2(grid, c):
    return inner_coeffs(grid, c, c)


def _comps(d, lo, hi):
    return (Ellipsis, slice(lo, hi)) + (slice(None),) * d


def remainder(grid: GridSpec, c: np.ndarray, params: PhysParams, energy: bool = False):
    """R(u) = mu (A - Stokes) u + B(u, u) + beta C(u), batched.

    One inverse and one forward transform of stacked components.  With
    ``energy`` also returns <A(u), u> and ||u||_r^r from the same samples.
    """
    d = grid.d
    lead = c.shape[: c.ndim - d - 1]
    gc = (1j * grid.k[:, None] * np.expand_dims(c, -d - 2)).reshape(lead + (d * d,) + grid.shape)
    vals = to_padded(grid, np.concatenate([c, gc], axis=-d - 1))
    U = vals[_comps(d, None, d)]
    G = vals[_comps(d, d, None)].reshape(lead + (d, d) + grid.padded_shape)
    phys = np.sum(np.expand_dims(U, -d - 1) * G, axis=-d - 2)  # (u . grad) u
    r_pow = np.zeros(lead) if energy else None
    if params.beta:
        u2 = vec2(U, d)
        if params.r == 2:
            phys = phys + params.beta * U
        else:
            phys = phys + params.beta * np.expand_dims(u2 ** (0.5 * (params.r - 2)), -d - 1) * U
        if energy:
            r_pow = quad(grid, u2 ** (0.5 * params.r))
    if params.p == 2:
        R = project_coeffs(grid, from_padded(grid, phys))
        a_pair = inner_coeffs(grid, c, grid.k2 * c) if energy else None
    else:
        g2 = frob2(G, d)
        F = np.expand_dims((1.0 + g2) ** (0.5 * (params.p - 2)), (-d - 2, -d - 1)) * G
        both = from_padded(grid, np.concatenate([phys, F.reshape(lead + (d * d,) + grid.padded_shape)], axis=-d - 1))
        Fc = both[_comps(d, d, None)].reshape(lead + (d, d) + grid.shape)
        R = project_coeffs(grid, both[_comps(d, None, d)] - params.mu * div_coeffs(grid, Fc))
        R = R - params.mu * grid.k2 * c
        a_pair = quad(grid, np.sum(G * F, axis=(-d - 2, -d - 1))) if energy else None
    if energy:
        return R, a_pair, r_pow
    return R


def _bcast(x, grid):
    return np.asarray(x).reshape(np.shape(x) + (1,) * (grid.d + 1))


def _advance(grid, c, t, dt, dW, params, noise, f, eps, R=None):
    if R is None:
        R = remainder(grid, c, params)
    if eps != 1:
        R = eps * R
    tamed = R / _bcast(1.0 + dt * np.sqrt(_h2(grid, R)), grid)
    rhs = c - dt * tamed
    if f is not None:
        rhs = rhs + (dt * eps) * f.at(eps * t)
    if noise is not None:
        rhs = rhs + math.sqrt(eps) * noise.apply(c, dW)
    return rhs / (1.0 + (dt * eps * params.mu) * grid.k2)


def step(u: SpectralField, t: float, dt: float, dW, params: PhysParams, noise: NoiseModel | None = None,
         f: Forcing | None = None, eps: float = 1.0) -> SpectralField:
    if not dt > 0:
        raise ValueError("time.dt must be positive")
    if params.d != u.grid.d:
        raise ValueError("params.d does not match the grid")
    out = _advance(u.grid, u.coeffs, t, dt, _dW_for(noise, dW), params, noise, f, eps)
    if not np.all(np.isfinite(out)):
        raise IntegrationError(0)
    return SpectralField(u.grid, out)


def _dW_for(noise, dW):
    if noise is None:
        return None
    dW = np.asarray(dW, dtype=float)
    if dW.shape[-1] != noise.K_max:
        raise ValueError(f"increments have {dW.shape[-1]} modes, noise has {noise.K_max}")
    return dW


# ----------------------------------------------------------------------------
# trajectories


def n_steps(T: float, dt: float) -> int:
    if T < 0 or not dt > 0:
        raise ValueError("time.T must be >= 0 and time.dt > 0")
    N = round(T / dt)
    if abs(N * dt - T) > 1e-9 * max(T, dt):
        raise ValueError(f"time.T = {T} is not a multiple of time.dt = {dt}")
    return int(N)


def increments(seed: int, N: int, K: int, dt: float, path: int = 0, eps_index: int = 0) -> np.ndarray:
    """Brownian increments of one path, shape (N, K), from its own Philox stream."""
    return stream(seed, _TAG_W, eps_index, path).standard_normal((N, K)) * math.sqrt(dt)


@dataclass(eq=False)
class Trajectory:
    grid: GridSpec
    t: np.ndarray
    coeffs: np.ndarray
    dW: np.ndarray
    params: PhysParams
    seed: int | None
    eps: float = 1.0
    noise: dict | None = None

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0]) if self.t.size > 1 else 0.0

    @property
    def n_steps(self) -> int:
        return self.t.size - 1

    def field(self, i: int) -> SpectralField:
        return SpectralField(self.grid, self.coeffs[i])

    def manifest(self) -> dict:
        return {"seed": self.seed, "eps": self.eps, "dt": self.dt, "n_steps": self.n_steps,
                "grid": {"n": self.grid.n, "d": self.grid.d, "pad_factor": self.grid.pad_factor},
                "params": self.params.as_dict(), "noise": self.noise}


def simulate_path(u0: SpectralField, T: float, dt: float, params: PhysParams, noise: NoiseModel | None = None,
                  f: Forcing | None = None, seed: int = 0, eps: float = 1.0, eps_index: int = 0,
                  dW: np.ndarray | None = None) -> Trajectory:
    grid = u0.grid
    if u0.divergence_max() > 1e-12 * max(1.0, float(np.max(np.abs(u0.coeffs)))):
        raise ValueError("u0 must be divergence-free")
    N = n_steps(T, dt)
    K = noise.K_max if noise is not None else 0
    if dW is None:
        dW = increments(seed, N, K, dt, 0, eps_index) if K else np.zeros((N, 0))
    elif dW.shape != (N, K):
        raise ValueError(f"increments must have shape {(N, K)}, got {dW.shape}")
    out = np.empty((N + 1,) + u0.coeffs.shape, dtype=complex)
    out[0] = u0.coeffs
    for i in range(N):
        out[i + 1] = _advance(grid, out[i], i * dt, dt, dW[i] if K else None, params, noise, f, eps)
        if not np.all(np.isfinite(out[i + 1])):
            raise IntegrationError(i)
    t = np.arange(N + 1) * dt
    return Trajectory(grid, t, out, dW, params, seed, eps, noise.describe() if noise else None)


def truncation_sensitivity(u0: SpectralField, T: float, dt: float, params: PhysParams,
                           noise: NoiseModel | None = None, seed: int = 0,
                           coarse: Trajectory | None = None) -> dict:
    """Rerun on the 2n grid with the same increments and compare on the n band.

    Returns the sup over the time grid of ||u_n - P_n u_2n||_H, absolute and
    relative to sup ||u_2n||_H.  No rate is implied.  ``coarse`` reuses an
    existing n-grid run of the same inputs.
    """
    if coarse is None:
        coarse = simulate_path(u0, T, dt, params, noise, seed=seed)
    fine_u0 = refine(u0)
    fine_noise = None
    if noise is not None:
        fine_noise = NoiseModel(fine_u0.grid, noise.kind, noise.coeffs, noise.a, noise.b)
        back = restrict(SpectralField(fine_u0.grid, fine_noise.modes[-1]), u0.grid).coeffs
        if np.max(np.abs(back - noise.modes[-1])) > 1e-14:
            raise ValueError("noise modes differ between the n and 2n grids")
    fine = simulate_path(fine_u0, T, dt, params, fine_noise, dW=coarse.dW)
    gap = max(float(np.sqrt(_h2(u0.grid, coarse.coeffs[i] - restrict(fine.field(i), u0.grid).coeffs)))
              for i in range(coarse.t.size))
    size = float(np.sqrt(np.max(_h2(fine.grid, fine.coeffs))))
    return {"n": u0.grid.n, "n_fine": fine.grid.n, "sup_gap": gap, "relative": gap / max(size, 1e-300)}


def simulate_rescaled(eps: float, u0, T, dt, params, noise=None, f=None, seed: int = 0, eps_index: int = 0,
                      dW=None) -> Trajectory:
    if not 0 <= eps <= 1:
        raise ValueError("eps must lie in [0, 1]")
    return simulate_path(u0, T, dt, params, noise, f, seed, eps, eps_index, dW)


def simulate_comparison(eps: float, u0: SpectralField, T: float, dt: float, noise: NoiseModel,
                        dW: np.ndarray | None = None, seed: int = 0, eps_index: int = 0) -> Trajectory:
    """Drift-free v+ = v + sqrt(eps) sum_k sigma_k(v) dW_k, tracked in modal coordinates."""
    N = n_steps(T, dt)
    if dW is None:
        dW = increments(seed, N, noise.K_max, dt, 0, eps_index)
    elif dW.shape != (N, noise.K_max):
        raise ValueError(f"increments must have shape {(N, noise.K_max)}, got {dW.shape}")
    z0 = noise.modal(u0.coeffs)
    z = comparison_modal(noise, z0, dW, eps)
    shift = (z - z0) @ noise.modes.reshape(noise.K_max, -1)
    coeffs = u0.coeffs + shift.reshape((N + 1,) + u0.coeffs.shape)
    prm = PhysParams(d=u0.grid.d)
    return Trajectory(u0.grid, np.arange(N + 1) * dt, coeffs, dW, prm, seed, eps, noise.describe())


def comparison_modal(noise: NoiseModel, z0: np.ndarray, dW: np.ndarray, eps: float) -> np.ndarray:
    """Modal path z_k(t_i) of the comparison process; dW (..., N, K) -> (..., N+1, K)."""
    s = math.sqrt(eps)
    N = dW.shape[-2]
    z = np.empty(dW.shape[:-2] + (N + 1, noise.K_max))
    z[..., 0, :] = z0
    for i in range(N):
        zi = z[..., i, :]
        z[..., i + 1, :] = zi + s * noise.coeffs * (noise.a + noise.b * zi) * dW[..., i, :]
    return z


# ----------------------------------------------------------------------------
# energy audit


@dataclass
class EnergyBudget:
    """Left-point terms of the discrete Ito energy identity, one entry per step.

    Rates (dissipation, damping, forcing, ito) are multiplied by dt when
    accumulated; martingale entries are already increments.
    """

    t: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    damping: np.ndarray
    forcing: np.ndarray
    ito: np.ndarray
    martingale: np.ndarray

    @property
    def residual(self) -> np.ndarray:
        """LHS - RHS of the telescoped identity at every t_i (0 at t_0)."""
        dt = self.t[1] - self.t[0] if self.t.size > 1 else 0.0
        inc = dt * (self.dissipation + self.damping - self.forcing - self.ito) - self.martingale
        return self.energy - self.energy[0] + np.concatenate([[0.0], np.cumsum(inc)])

    def totals(self) -> dict:
        dt = self.t[1] - self.t[0] if self.t.size > 1 else 0.0
        return {"energy_0": float(self.energy[0]), "energy_T": float(self.energy[-1]),
                "dissipation": float(dt * self.dissipation.sum()), "damping": float(dt * self.damping.sum()),
                "forcing": float(dt * self.forcing.sum()), "ito": float(dt * self.ito.sum()),
                "martingale": float(self.martingale.sum()), "residual": float(self.residual[-1])}


def _budget_rates(grid, c, params, noise, fc):
    R, a_pair, r_pow = remainder(grid, c, params, energy=True)
    diss = 2 * params.mu * a_pair
    damp = 2 * params.beta * r_pow
    forc = 2 * inner_coeffs(grid, fc, c) if fc is not None else np.zeros_like(diss)
    ito = noise.ito_correction(c) if noise is not None else np.zeros_like(diss)
    return R, diss, damp, forc, ito


def energy_audit(traj: Trajectory, noise: NoiseModel | None = None, f: Forcing | None = None) -> EnergyBudget:
    if traj.eps != 1:
        raise ValueError("the energy audit applies to eps = 1 trajectories")
    grid, prm, N = traj.grid, traj.params, traj.n_steps
    c = traj.coeffs[:N]
    energy = _h2(grid, traj.coeffs)
    if N == 0:
        z = np.zeros(0)
        return EnergyBudget(traj.t, energy, z, z, z, z, z)
    fc = np.stack([f.at(t) for t in traj.t[:N]]) if f is not None else None
    _, diss, damp, forc, ito = _budget_rates(grid, c, prm, noise, fc)
    mart = 2 * np.sum(noise.pairing_with(c) * traj.dW, axis=-1) if noise is not None else np.zeros(N)
    return EnergyBudget(traj.t, energy, diss, damp, forc, ito, mart)


# ----------------------------------------------------------------------------
# ensembles


@dataclass(frozen=True, eq=False)
class EnsembleSpec:
    grid: GridSpec
    params: PhysParams
    u0: np.ndarray
    T: float
    dt: float
    noise: NoiseModel | None = None
    f: Forcing | None = None
    seed: int = 0
    eps: float = 1.0
    eps_index: int = 0
    drift: bool = True

    @property
    def N(self) -> int:
        return n_steps(self.T, self.dt)


def _chunk_increments(spec, start, stop):
    K = spec.noise.K_max if spec.noise is not None else 0
    if not K:
        return np.zeros((stop - start, spec.N, 0))
    return np.stack([increments(spec.seed, spec.N, K, spec.dt, j, spec.eps_index) for j in range(start, stop)])


def _run_chunk(spec: EnsembleSpec, start: int, stop: int, stats: tuple) -> dict:
    grid, prm, noise, dt, eps, N = spec.grid, spec.params, spec.noise, spec.dt, spec.eps, spec.N
    dW = _chunk_increments(spec, start, stop)
    m = stop - start
    out = {}
    if not spec.drift:
        z0 = noise.modal(spec.u0)
        z = comparison_modal(noise, z0, dW, eps)
        dev2 = np.sum((z - z0) ** 2, axis=-1)
        out["final_dev2"] = dev2[:, -1]
        out["final_modal"] = z[:, -1]
        return out
    c = np.broadcast_to(spec.u0, (m,) + spec.u0.shape).copy()
    want_energy = "energy" in stats
    want_gap = "gap" in stats
    want_exit = "exit" in stats
    e0 = _h2(grid, c)
    if want_energy:
        acc = {k: np.zeros(m) for k in ("dissipation", "damping", "forcing", "ito", "martingale", "bias")}
        q2 = np.array([np.dot(q, q) for q in noise.wavevectors], dtype=float) if noise is not None else None
    if want_gap:
        z0 = noise.modal(spec.u0)
        z = np.broadcast_to(z0, (m, noise.K_max)).copy()
        modes = noise.modes.reshape(noise.K_max, -1)
        gap = np.zeros(m)
    if want_exit:
        sup_e = e0.copy()
        integ = np.zeros(m)
    for i in range(N):
        t = i * dt
        dWi = dW[:, i] if noise is not None else None
        if want_energy:
            if eps != 1:
                raise ValueError("the energy audit applies to eps = 1")
            fc = spec.f.at(t) if spec.f is not None else None
            R, diss, damp, forc, ito = _budget_rates(grid, c, prm, noise, fc)
            acc["dissipation"] += dt * diss
            acc["damping"] += dt * damp
            acc["forcing"] += dt * forc
            acc["ito"] += dt * ito
            if noise is not None:
                acc["martingale"] += 2 * np.sum(noise.pairing_with(c) * dWi, axis=-1)
            nR = np.sqrt(_h2(grid, R))
            uR = inner_coeffs(grid, c, R)
            nS = np.sqrt(_h2(grid, grid.k2 * c))
            nF = math.sqrt(float(_h2(grid, fc))) if fc is not None else 0.0
            drift = nR + nF + prm.mu * nS
            beta_i = 2 * nR * np.abs(uR) + 2 * prm.mu * nS * drift + drift**2
            if noise is not None:
                beta_i = beta_i + 2 * prm.mu * np.sum(noise.amplitudes(c) ** 2 * q2, axis=-1)
            acc["bias"] += dt * dt * beta_i
            nxt = _advance(grid, c, t, dt, dWi, prm, noise, spec.f, eps, R=R)
        else:
            nxt = _advance(grid, c, t, dt, dWi, prm, noise, spec.f, eps)
        if want_exit:
            integ += dt * _exit_rate(grid, c, prm, eps)
        if not np.all(np.isfinite(nxt)):
            raise IntegrationError(i)
        c = nxt
        if want_gap:
            z = z + math.sqrt(eps) * noise.coeffs * (noise.a + noise.b * z) * dWi
            v_shift = ((z - z0) @ modes).reshape(c.shape)
            gap = np.maximum(gap, _h2(grid, c - spec.u0 - v_shift))
        if want_exit:
            sup_e = np.maximum(sup_e, _h2(grid, c))
    eT = _h2(grid, c)
    out["energy_T"] = eT
    out["final_dev2"] = _h2(grid, c - spec.u0)
    if want_energy:
        out.update(acc)
        out["residual"] = (eT - e0 + acc["dissipation"] + acc["damping"] - acc["forcing"] - acc["ito"]
                           - acc["martingale"])
    if want_gap:
        out["gap_sup"] = gap
    if want_exit:
        out["exit_functional"] = sup_e + integ
    return out


def _exit_rate(grid, c, prm, eps):
    """eps mu ||u||_V2^2 + (eps mu / 2) ||u||_Vp^p + eps beta ||u||_r^r."""
    G = to_padded(grid, 1j * grid.k[:, None] * np.expand_dims(c, -grid.d - 2))
    g2 = frob2(G, grid.d)
    out = eps * prm.mu * inner_coeffs(grid, c, grid.k2 * c)
    out = out + 0.5 * eps * prm.mu * quad(grid, g2 ** (0.5 * prm.p))
    if prm.beta:
        out = out + eps * prm.beta * quad(grid, vec2(to_padded(grid, c), grid.d) ** (0.5 * prm.r))
    return out


def _chunk_job(args):
    return _run_chunk(*args)


def run_ensemble(spec: EnsembleSpec, n_paths: int, stats: tuple = (), workers: int = 1,
                 chunk: int = CHUNK) -> dict:
    """Per-path statistics over ``n_paths`` paths; path j always uses stream (seed, eps_index, j)."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    jobs = [(spec, s, min(s + chunk, n_paths), tuple(stats)) for s in range(0, n_paths, chunk)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_chunk_job, jobs))
    else:
        parts = [_chunk_job(j) for j in jobs]
    return {k: np.concatenate([p[k] for p in parts]) for k in parts[0]}


@dataclass
class EnsembleEnergy:
    n_paths: int
    dt: float
    energy_0: float
    per_path: dict = field(repr=False)

    def mean_se(self, key: str) -> tuple:
        x = self.per_path[key]
        return float(np.mean(x)), float(np.std(x, ddof=1) / math.sqrt(x.size)) if x.size > 1 else 0.0

    @property
    def bias_bound(self) -> float:
        """Bound on |E residual| from the one-step truncation terms (mean of the per-path sums)."""
        return float(np.mean(self.per_path["bias"]))

    def summary(self) -> dict:
        out = {"n_paths": self.n_paths, "dt": self.dt, "energy_0": self.energy_0, "bias_bound": self.bias_bound}
        for k in ("energy_T", "dissipation", "damping", "forcing", "ito", "martingale", "residual"):
            m, se = self.mean_se(k)
            out[k] = {"mean": m, "se": se}
        m, se = self.mean_se("residual")
        out["residual_ok"] = abs(m) <= 3 * se + self.bias_bound
        m, se = self.mean_se("martingale")
        out["martingale_ok"] = abs(m) <= 3 * se
        return out


def ensemble_energy_audit(spec: EnsembleSpec, n_paths: int, workers: int = 1) -> EnsembleEnergy:
    res = run_ensemble(spec, n_paths, ("energy",), workers)
    return EnsembleEnergy(n_paths, spec.dt, float(_h2(spec.grid, spec.u0)), res)


# ----------------------------------------------------------------------------
# export


def trajectory_rows(traj: Trajectory) -> list:
    grid, prm = traj.grid, traj.params
    c = traj.coeffs
    h = np.sqrt(_h2(grid, c))
    v2 = np.sqrt(inner_coeffs(grid, c, grid.k2 * c))
    G = to_padded(grid, 1j * grid.k[:, None] * np.expand_dims(c, -grid.d - 2))
    gp = quad(grid, frob2(G, grid.d) ** (0.5 * prm.p)) ** (1 / prm.p)
    lr = quad(grid, vec2(to_padded(grid, c), grid.d) ** (0.5 * prm.r)) ** (1 / prm.r)
    return [(float(t), float(a), float(b), float(x), float(y)) for t, a, b, x, y in zip(traj.t, h, v2, gp, lr)]


def trajectory_csv(traj: Trajectory) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(["t", "norm_H", "norm_V2", "grad_Lp", "norm_Lr"])
    for row in trajectory_rows(traj):
        w.writerow([repr(x) for x in row])
    return buf.getvalue()


_MAGIC = b"MSPD"


def dump_bytes(traj: Trajectory) -> bytes:
    g = traj.grid
    K = traj.dW.shape[1]
    head = _MAGIC + struct.pack("<5I d", 1, g.n, g.d, K, traj.n_steps, traj.dt)
    body = np.ascontiguousarray(traj.coeffs, dtype="<c16").tobytes()
    return head + body + np.ascontiguousarray(traj.dW, dtype="<f8").tobytes()


def load_dump(data: bytes) -> dict:
    if data[:4] != _MAGIC:
        raise ValueError("not a field dump")
    version, n, d, K, N, dt = struct.unpack_from("<5I d", data, 4)
    off = 4 + struct.calcsize("<5I d")
    count = (N + 1) * d * n**d
    coeffs = np.frombuffer(data, "<c16", count, off).reshape((N + 1, d) + (n,) * d)
    off += coeffs.nbytes
    dW = np.frombuffer(data, "<f8", N * K, off).reshape(N, K)
    return {"version": version, "n": n, "d": d, "K_max": K, "n_steps": N, "dt": dt, "coeffs": coeffs, "dW": dW}
