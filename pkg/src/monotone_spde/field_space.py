"""Divergence-free vector fields on the periodic torus [0, 2pi)^d.

Fields are stored as complex Fourier coefficients in numpy FFT ordering with
the normalisation u(x) = sum_k u_hat(k) exp(i k.x), so that

    ||u||_H^2 = (2 pi)^d sum_k |u_hat(k)|^2.

Only wavenumbers with |k_i| < n/2 are retained; the Nyquist planes are kept at
zero so that every stored field is exactly the coefficient set of a real
trigonometric polynomial.  Nonlinear quantities are evaluated on the
``pad_factor * n`` grid, where the trapezoidal rule integrates every
trigonometric polynomial of degree < pad_factor * n exactly.

The low-level helpers (``grad_coeffs``, ``to_padded`` ...) act on arrays with
arbitrary leading batch axes; ``SpectralField`` is the immutable single-field
wrapper used by the public API.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Union

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class GridSpec:
    n: int = 16
    d: int = 2
    pad_factor: int = 2

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 4 or self.n & (self.n - 1):
            raise ValueError(f"grid.n must be a power of two >= 4, got {self.n!r}")
        if self.d not in (2, 3):
            raise ValueError(f"grid.d must be 2 or 3, got {self.d!r}")
        if not isinstance(self.pad_factor, (int, np.integer)) or self.pad_factor < 2:
            raise ValueError(f"grid.pad_factor must be an integer >= 2, got {self.pad_factor!r}")

    @property
    def M(self) -> int:
        """Points per dimension of the oversampled quadrature grid."""
        return self.pad_factor * self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    @property
    def padded_shape(self) -> tuple:
        return (self.M,) * self.d

    @property
    def volume(self) -> float:
        return TWO_PI**self.d

    @property
    def padded_weight(self) -> float:
        return (TWO_PI / self.M) ** self.d

    @cached_property
    def k(self) -> np.ndarray:
        """Integer wavevectors, shape (d, n, ..., n)."""
        k1 = np.fft.fftfreq(self.n, 1.0 / self.n)
        return np.array(np.meshgrid(*([k1] * self.d), indexing="ij"))

    @cached_property
    def k2(self) -> np.ndarray:
        return np.sum(self.k**2, axis=0)

    @cached_property
    def band(self) -> np.ndarray:
        """Retained modes: every |k_i| < n/2 (Nyquist planes dropped)."""
        return np.all(np.abs(self.k) < self.n // 2, axis=0)

    @cached_property
    def band_mean_free(self) -> np.ndarray:
        return self.band & (self.k2 > 0)

    @cached_property
    def inv_k2(self) -> np.ndarray:
        out = np.zeros_like(self.k2)
        np.divide(1.0, self.k2, out=out, where=self.k2 > 0)
        return out

    @cached_property
    def _embed_index(self) -> tuple:
        idx = (np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)) % self.M
        return np.ix_(*([idx] * self.d))

    @cached_property
    def _half_index(self) -> tuple:
        idx = (np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)) % self.M
        return np.ix_(*([idx] * (self.d - 1) + [np.arange(self.n // 2)]))

    def mask(self, mean_free: bool = True) -> np.ndarray:
        return self.band_mean_free if mean_free else self.band

    def coords(self, padded: bool = False) -> np.ndarray:
        m = self.M if padded else self.n
        x1 = TWO_PI * np.arange(m) / m
        return np.array(np.meshgrid(*([x1] * self.d), indexing="ij"))


# ----------------------------------------------------------------------------
# array kernels (leading batch axes allowed)


def _spatial_axes(grid: GridSpec) -> tuple:
    return tuple(range(-grid.d, 0))


def project_coeffs(grid: GridSpec, c: np.ndarray, mean_free: bool = True) -> np.ndarray:
    """Leray projection (I - k k^T/|k|^2) applied mode by mode, components on axis -d-1."""
    k = grid.k
    kdotc = np.sum(k * c, axis=-grid.d - 1, keepdims=True)
    out = c - k * (kdotc * grid.inv_k2)
    return out * grid.mask(mean_free)


def hermitian_part(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    """(c(k) + conj(c(-k))) / 2: coefficients of the real part of the field."""
    axes = _spatial_axes(grid)
    flipped = np.roll(np.flip(c, axis=axes), 1, axis=axes)
    return 0.5 * (c + np.conj(flipped))


def grad_coeffs(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    """(grad u)_{ij} = d u_j / d x_i -> shape (..., d, d, n, ..., n)."""
    return 1j * grid.k[:, None] * np.expand_dims(c, -grid.d - 2)


def div_coeffs(grid: GridSpec, F: np.ndarray) -> np.ndarray:
    """(div F)_j = sum_i d F_ij / d x_i for tensor coefficients (..., d, d, n..)."""
    return np.sum(1j * grid.k[:, None] * F, axis=-grid.d - 2)


def _embed(x: np.ndarray, axis: int, n: int, M: int) -> np.ndarray:
    """Zero-pad a length-n fftfreq-ordered axis to length M."""
    shape = list(x.shape)
    shape[axis] = M
    out = np.zeros(shape, dtype=x.dtype)
    h = n // 2
    idx = [slice(None)] * x.ndim
    src = [slice(None)] * x.ndim
    idx[axis], src[axis] = slice(0, h), slice(0, h)
    out[tuple(idx)] = x[tuple(src)]
    idx[axis], src[axis] = slice(M - h + 1, M), slice(h + 1, n)
    out[tuple(idx)] = x[tuple(src)]
    return out


def _truncate(x: np.ndarray, axis: int, n: int, M: int) -> np.ndarray:
    h = n // 2
    idx = [slice(None)] * x.ndim
    idx[axis] = np.r_[0:h, h:h + 1, M - h + 1:M]
    out = x[tuple(idx)]
    zero = [slice(None)] * x.ndim
    zero[axis] = h
    out[tuple(zero)] = 0
    return out


def to_padded(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    """Real values on the pad_factor*n grid of the band-limited (Hermitian) coefficients c.

    Axis-by-axis inverse transform that never touches the zero padding of
    axes not yet transformed.
    """
    n, M, d = grid.n, grid.M, grid.d
    x = c[..., : n // 2]
    for j in range(d - 1):
        ax = -d + j
        x = np.fft.ifft(_embed(x, ax, n, M), axis=ax, norm="forward")
    pad = [(0, 0)] * (x.ndim - 1) + [(0, M // 2 + 1 - n // 2)]
    return np.fft.irfft(np.pad(x, pad), n=M, axis=-1, norm="forward")


def from_padded(grid: GridSpec, vals: np.ndarray) -> np.ndarray:
    """Coefficients of real padded-grid samples, truncated to the retained band."""
    n, M, d = grid.n, grid.M, grid.d
    x = np.fft.rfft(vals, axis=-1, norm="forward")[..., : n // 2]
    for j in reversed(range(d - 1)):
        ax = -d + j
        x = _truncate(np.fft.fft(x, axis=ax, norm="forward"), ax, n, M)
    return _hermitian_fill(grid, x)


def _hermitian_fill(grid: GridSpec, half: np.ndarray) -> np.ndarray:
    """Full n^d coefficients from the k_d >= 0 half, via c(-k) = conj c(k)."""
    n = grid.n
    full = np.zeros(half.shape[:-1] + (n,), dtype=complex)
    full[..., : n // 2] = half
    neg = np.conj(half[..., 1:][..., ::-1])
    axes = tuple(range(-grid.d, -1))
    if axes:
        neg = np.roll(np.flip(neg, axis=axes), 1, axis=axes)
    full[..., n // 2 + 1:] = neg
    return full * grid.band


def to_grid(grid: GridSpec, c: np.ndarray) -> np.ndarray:
    return np.fft.ifftn(c, axes=_spatial_axes(grid)).real * grid.n**grid.d


def from_grid(grid: GridSpec, vals: np.ndarray) -> np.ndarray:
    return np.fft.fftn(vals, axes=_spatial_axes(grid)) / grid.n**grid.d * grid.band


def quad(grid: GridSpec, vals: np.ndarray) -> np.ndarray:
    """Trapezoidal integral over the torus of padded-grid samples."""
    return np.sum(vals, axis=_spatial_axes(grid)) * grid.padded_weight


def inner_coeffs(grid: GridSpec, a: np.ndarray, b: np.ndarray, ncomp_axes: int = 1) -> np.ndarray:
    """L2 pairing by Parseval, summing ``ncomp_axes`` component axes plus the modes."""
    axes = tuple(range(-grid.d - ncomp_axes, 0))
    return grid.volume * np.sum((a * np.conj(b)).real, axis=axes)


def frob2(G: np.ndarray, d: int) -> np.ndarray:
    """Pointwise |G|^2 for padded tensor samples (..., d, d, M..)."""
    return np.sum(G**2, axis=(-d - 2, -d - 1))


def vec2(v: np.ndarray, d: int) -> np.ndarray:
    return np.sum(v**2, axis=-d - 1)


def random_coeffs(grid: GridSpec, rng: np.random.Generator, s: float = 3.0, a: float = 1.0,
                  size: tuple = ()) -> np.ndarray:
    """Gaussian divergence-free mean-free coefficients with spectrum a (1+|k|^2)^(-s/2)."""
    shape = tuple(size) + (grid.d,) + grid.shape
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    a = np.asarray(a, dtype=float).reshape(np.shape(a) + (1,) * (grid.d + 1))
    c = a * (1.0 + grid.k2) ** (-0.5 * s) * z
    c = project_coeffs(grid, c, mean_free=True)
    return hermitian_part(grid, c)


# ----------------------------------------------------------------------------
# immutable field values


@dataclass(frozen=True, eq=False)
class SpectralField:
    grid: GridSpec
    coeffs: np.ndarray
    mean_free: bool = True

    def __post_init__(self):
        expected = (self.grid.d,) + self.grid.shape
        if self.coeffs.shape != expected:
            raise ValueError(f"coefficient shape {self.coeffs.shape} does not match grid {expected}")
        view = self.coeffs.view()
        view.flags.writeable = False
        object.__setattr__(self, "coeffs", view)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "SpectralField":
        return cls(grid, np.zeros((grid.d,) + grid.shape, dtype=complex))

    def _check(self, other: "SpectralField"):
        if not isinstance(other, SpectralField) or other.grid != self.grid:
            raise ValueError("fields live on different grids")

    def __add__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs + other.coeffs, self.mean_free and other.mean_free)

    def __sub__(self, other):
        self._check(other)
        return SpectralField(self.grid, self.coeffs - other.coeffs, self.mean_free and other.mean_free)

    def __mul__(self, scalar):
        return SpectralField(self.grid, self.coeffs * float(scalar), self.mean_free)

    __rmul__ = __mul__

    def __neg__(self):
        return SpectralField(self.grid, -self.coeffs, self.mean_free)

    def divergence_max(self) -> float:
        return float(np.max(np.abs(np.sum(self.grid.k * self.coeffs, axis=0))))

    def hermitian_defect(self) -> float:
        return float(np.max(np.abs(self.coeffs - hermitian_part(self.grid, self.coeffs))))


@dataclass(frozen=True, eq=False)
class TensorField:
    """Holds grad u: entries[i, j] = d u_j / d x_i as spectral coefficients."""

    grid: GridSpec
    entries: np.ndarray

    def __post_init__(self):
        view = self.entries.view()
        view.flags.writeable = False
        object.__setattr__(self, "entries", view)


Field = Union[SpectralField, TensorField]


def _coeffs_of(v) -> np.ndarray:
    return v.coeffs if isinstance(v, SpectralField) else np.asarray(v)


def leray_project(v, grid: GridSpec | None = None, mean_free: bool = True) -> SpectralField:
    """Helmholtz projection onto divergence-free fields.

    ``v`` may be a SpectralField or a raw coefficient array (then ``grid`` is
    required).  With ``mean_free=False`` the k = 0 mode passes through.
    """
    if isinstance(v, SpectralField):
        grid = v.grid
    elif grid is None:
        raise ValueError("grid required for raw coefficient input")
    c = project_coeffs(grid, _coeffs_of(v), mean_free=mean_free)
    return SpectralField(grid, c, mean_free)


def gradient(u: SpectralField) -> TensorField:
    return TensorField(u.grid, grad_coeffs(u.grid, u.coeffs))


def to_physical(u: SpectralField, padded: bool = False) -> np.ndarray:
    if padded:
        return to_padded(u.grid, u.coeffs)
    return to_grid(u.grid, u.coeffs)


def to_spectral(grid: GridSpec, values: np.ndarray, padded: bool = False) -> np.ndarray:
    """Raw (unprojected) coefficients of grid samples, truncated to the band."""
    values = np.asarray(values, dtype=float)
    return from_padded(grid, values) if padded else from_grid(grid, values)


def _grad_padded(u: SpectralField) -> np.ndarray:
    return to_padded(u.grid, grad_coeffs(u.grid, u.coeffs))


def raw_power(u: SpectralField, which: str, exponent: float) -> float:
    """int |grad u|^p (which='Vp') or int |u|^r (which='Lr') by padded quadrature."""
    if exponent < 1:
        raise ValueError(f"exponent must be >= 1, got {exponent}")
    g = u.grid
    if which == "Vp":
        mag2 = frob2(_grad_padded(u), g.d)
    elif which == "Lr":
        mag2 = vec2(to_padded(g, u.coeffs), g.d)
    else:
        raise ValueError(f"raw_power supports 'Vp' and 'Lr', got {which!r}")
    return float(quad(g, mag2 ** (0.5 * exponent)))


def norm(u: SpectralField, which: str = "H", exponent: float | None = None) -> float:
    """||u||_H, ||u||_V2 = ||grad u||_H, ||u||_Vp = ||grad u||_Lp or ||u||_Lr."""
    g = u.grid
    if which == "H":
        return float(np.sqrt(inner_coeffs(g, u.coeffs, u.coeffs)))
    if which == "V2":
        G = grad_coeffs(g, u.coeffs)
        return float(np.sqrt(inner_coeffs(g, G, G, ncomp_axes=2)))
    if which in ("Vp", "Lr"):
        if exponent is None:
            raise ValueError(f"norm {which!r} needs an exponent")
        return raw_power(u, which, exponent) ** (1.0 / exponent)
    raise ValueError(f"unknown norm {which!r}")


def pairing(u: Field, v: Field) -> float:
    """int u . v dx (or int grad u : grad v for TensorField) via Parseval."""
    if type(u) is not type(v):
        raise ValueError("pairing needs two fields of the same kind")
    if u.grid != v.grid:
        raise ValueError("fields live on different grids")
    if isinstance(u, TensorField):
        return float(inner_coeffs(u.grid, u.entries, v.entries, ncomp_axes=2))
    return float(inner_coeffs(u.grid, u.coeffs, v.coeffs))


def random_field(grid: GridSpec, seed=None, s: float = 3.0, a: float = 1.0,
                 rng: np.random.Generator | None = None) -> SpectralField:
    """Smooth random divergence-free field; deterministic in ``seed``."""
    if rng is None:
        rng = np.random.default_rng(seed)
    return SpectralField(grid, random_coeffs(grid, rng, s=s, a=a))


def fourier_mode(grid: GridSpec, wavevector, amplitude, kind: str = "sin") -> SpectralField:
    """Field amplitude * sin(q.x) (or cos) with a constant vector amplitude.

    The caller is responsible for amplitude . q = 0 if a divergence-free field
    is wanted; no projection is applied.
    """
    q = np.asarray(wavevector, dtype=int)
    amp = np.asarray(amplitude, dtype=float)
    c = np.zeros((grid.d,) + grid.shape, dtype=complex)
    pos = tuple(int(qi) % grid.n for qi in q)
    neg = tuple(int(-qi) % grid.n for qi in q)
    if kind == "sin":
        c[(slice(None),) + pos] += amp / 2j
        c[(slice(None),) + neg] -= amp / 2j
    elif kind == "cos":
        c[(slice(None),) + pos] += amp / 2
        c[(slice(None),) + neg] += amp / 2
    else:
        raise ValueError(kind)
    return SpectralField(grid, c * grid.band, mean_free=bool(np.any(q != 0)))


def _transfer_index(small: GridSpec, large_n: int) -> tuple:
    idx = (np.fft.fftfreq(small.n, 1.0 / small.n).astype(int)) % large_n
    return np.ix_(*([idx] * small.d))


def refine(u: SpectralField, factor: int = 2) -> SpectralField:
    """The same trigonometric polynomial on a grid with ``factor`` times more modes."""
    fine = GridSpec(u.grid.n * factor, u.grid.d, u.grid.pad_factor)
    c = np.zeros((fine.d,) + fine.shape, dtype=complex)
    c[(slice(None),) + _transfer_index(u.grid, fine.n)] = u.coeffs
    return SpectralField(fine, c, u.mean_free)


def restrict(u: SpectralField, coarse: GridSpec) -> SpectralField:
    """Truncate a field to the retained band of a coarser grid."""
    c = u.coeffs[(slice(None),) + _transfer_index(coarse, u.grid.n)] * coarse.band
    return SpectralField(coarse, c, u.mean_free)


def _polarisations(q: np.ndarray) -> list:
    if q.size == 2:
        e = np.array([-q[1], q[0]], dtype=float)
        return [e / np.linalg.norm(e)]
    # d = 3: two unit vectors orthogonal to q and to each other
    trial = np.eye(3)[int(np.argmin(np.abs(q)))]
    e1 = np.cross(q, trial)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(q, e1)
    return [e1, e2 / np.linalg.norm(e2)]


def divfree_modes(grid: GridSpec, count: int | None = None):
    """Real orthonormal (in H) divergence-free Fourier modes e cos(q.x), e sin(q.x).

    One wavevector per +-q pair, ordered by |q| then lexicographically; for each
    q and polarisation the cos mode precedes the sin mode.  Returns
    ``(coeffs, wavevectors)`` with coeffs of shape (count, d, n, ..., n).
    """
    h = grid.n // 2 - 1
    rng_ = range(-h, h + 1)
    qs = []
    for q in np.array(np.meshgrid(*([rng_] * grid.d), indexing="ij")).reshape(grid.d, -1).T:
        nz = q[np.nonzero(q)[0]]
        if nz.size and nz[0] > 0:
            qs.append(q)
    qs.sort(key=lambda q: (int(q @ q), tuple(q)))
    scale = np.sqrt(2.0 / grid.volume)
    coeffs, waves = [], []
    for q in qs:
        for e in _polarisations(q):
            for kind in ("cos", "sin"):
                coeffs.append(fourier_mode(grid, q, scale * e, kind).coeffs)
                waves.append(tuple(int(x) for x in q))
                if count is not None and len(coeffs) == count:
                    return np.array(coeffs), waves
    if count is not None and len(coeffs) < count:
        raise ValueError(f"grid n = {grid.n} supports only {len(coeffs)} modes, asked for {count}")
    return np.array(coeffs), waves
