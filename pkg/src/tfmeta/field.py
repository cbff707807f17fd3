"""Complex fields sampled on uniform periodic grids.

A grid of N points per axis on [-L/2, L/2)^d has nodes x_k = -L/2 + k h with
h = L/N.  Its Fourier dual is the grid with N points and side N/L, i.e.
frequencies xi_m = -N/(2L) + m/L.  ``fourier`` is the Riemann sum

    F f(xi_m) = h^d sum_k f(x_k) exp(-2 pi i x_k . xi_m)

which is a centered DFT scaled by h^d; since N is a multiple of four the
centering phases cancel and ``inverse`` undoes ``forward`` exactly.

Off-grid values use the trigonometric interpolant
    f(y) = L^{-d} sum_m F f(xi_m) exp(2 pi i xi_m . y),
which reproduces the samples at grid nodes.
"""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import czt

from .errors import ContractError, DimensionError, DomainError, NyquistWarning, SingularityError

# dense exponential sums below this many (nodes x points) entries, chirp-z above
_DENSE_LIMIT = 1 << 21
# relative amplitude below which a sample counts as "outside the support"
SUPPORT_THRESHOLD = 1e-13


@dataclass(frozen=True)
class Grid:
    d: int
    N: int
    L: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise DimensionError(f"d must be 1 or 2, got {self.d}")
        N = int(self.N)
        if N < 8 or N & (N - 1):
            raise DimensionError(f"N must be a power of two >= 8, got {self.N}")
        if not (self.L > 0 and math.isfinite(self.L)):
            raise DomainError(f"L must be positive, got {self.L}")
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", float(self.L))

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.d

    @property
    def size(self) -> int:
        return self.N ** self.d

    @property
    def nyquist(self) -> float:
        return self.N / (2 * self.L)

    @property
    def axis(self) -> np.ndarray:
        return -self.L / 2 + np.arange(self.N) * self.h

    def coords(self) -> list[np.ndarray]:
        """Coordinate arrays, one per axis, each of shape ``self.shape``."""
        return list(np.meshgrid(*([self.axis] * self.d), indexing="ij"))

    def points(self) -> np.ndarray:
        """All nodes as an array of shape (N^d, d), row-major."""
        return np.stack([c.ravel() for c in self.coords()], axis=1)

    def dual(self) -> "Grid":
        return Grid(self.d, self.N, self.N / self.L)

    def index_of(self, x) -> tuple:
        """Multi-index of a node; raises if x is not a node."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        k = (x + self.L / 2) / self.h
        kr = np.rint(k)
        if np.max(np.abs(k - kr)) > 1e-9:
            raise DomainError(f"{x.tolist()} is not a multiple of h={self.h}")
        return tuple(int(v) % self.N for v in kr)

    @classmethod
    def parse(cls, text: str) -> "Grid":
        d, N, L = text.split(",")
        return cls(int(d), int(N), float(L))


@dataclass(frozen=True, eq=False)
class SampledField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=complex)
        if v.shape != self.grid.shape:
            if v.size == self.grid.size:
                v = v.reshape(self.grid.shape)
            else:
                raise DimensionError(f"expected {self.grid.size} values, got {v.size}")
        if not np.all(np.isfinite(v)):
            raise DomainError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "SampledField":
        return SampledField(self.grid, values)

    def conj(self) -> "SampledField":
        return SampledField(self.grid, np.conj(self.values))

    def __add__(self, other):
        _same_grid(self, other)
        return SampledField(self.grid, self.values + other.values)

    def __sub__(self, other):
        _same_grid(self, other)
        return SampledField(self.grid, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, SampledField):
            return multiply(self, c)
        return SampledField(self.grid, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return SampledField(self.grid, -self.values)


def _same_grid(f, g):
    if f.grid != g.grid:
        raise DimensionError(f"grid mismatch: {f.grid} vs {g.grid}")


def _as_matrix(A, d) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim == 0:
        A = A * np.eye(d)
    A = np.atleast_2d(A)
    if A.shape != (d, d):
        raise DimensionError(f"expected a {d}x{d} matrix, got {A.shape}")
    return A


def _quad(M, coords):
    """x . M x on a list of coordinate arrays."""
    d = len(coords)
    return sum(M[i, j] * coords[i] * coords[j] for i in range(d) for j in range(d))


# -- constructors ------------------------------------------------------------

def gaussian(grid: Grid, A=1.0) -> SampledField:
    """Samples of exp(-pi |A t|^2)."""
    A = _as_matrix(A, grid.d)
    if abs(np.linalg.det(A)) < 1e-300 or np.linalg.cond(A) > 1e14:
        raise SingularityError("Gaussian dilation matrix is singular")
    return SampledField(grid, np.exp(-np.pi * _quad(A.T @ A, grid.coords())))


def chirp(grid: Grid, R, sign: int = -1, warn: bool = True) -> SampledField:
    """Samples of exp(sign * pi i R t . t); flags chirps beyond Nyquist."""
    if sign not in (1, -1):
        raise DomainError("sign must be +1 or -1")
    R = _as_matrix(R, grid.d)
    if np.max(np.abs(R - R.T)) > 1e-12:
        raise ContractError("chirp matrix must be symmetric")
    # local frequency R t reaches |R| L/2 at the box edge
    if warn and np.linalg.norm(R, np.inf) * grid.L / 2 >= grid.nyquist:
        warnings.warn("chirp frequency exceeds the grid Nyquist band", NyquistWarning, stacklevel=2)
    return SampledField(grid, np.exp(sign * 1j * np.pi * _quad(R, grid.coords())))


def packet(grid: Grid, x0=0.0, xi0=0.0, sigma=1.0, R=0.0, amplitude=1.0) -> SampledField:
    """Gaussian-chirp packet c M_{xi0} T_{x0} [exp(-pi (sigma^2 I + i R) t . t)]."""
    d = grid.d
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (d,))
    xi0 = np.broadcast_to(np.asarray(xi0, dtype=float), (d,))
    Q = sigma ** 2 * np.eye(d) + 1j * _as_matrix(R, d)
    cs = grid.coords()
    sh = [c - x0[i] for i, c in enumerate(cs)]
    phase = sum(xi0[i] * cs[i] for i in range(d))
    v = amplitude * np.exp(-np.pi * _quad(Q, sh) + 2j * np.pi * phase)
    return SampledField(grid, v)


def zeros(grid: Grid) -> SampledField:
    return SampledField(grid, np.zeros(grid.shape, dtype=complex))


# -- Fourier transform -------------------------------------------------------

def _centered_fft(v, inverse=False):
    axes = tuple(range(v.ndim))
    op = np.fft.ifftn if inverse else np.fft.fftn
    w = op(np.fft.ifftshift(v, axes=axes), axes=axes)
    if inverse:
        w = w * np.prod(v.shape)
    return np.fft.fftshift(w, axes=axes)


def fourier(f: SampledField, direction: str = "forward") -> SampledField:
    """Riemann-sum Fourier transform onto the dual grid (or back)."""
    g = f.grid
    if direction == "forward":
        return SampledField(g.dual(), _centered_fft(f.values) * g.h ** g.d)
    if direction == "inverse":
        return SampledField(g.dual(), _centered_fft(f.values, inverse=True) * g.h ** g.d)
    raise DomainError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def inverse_fourier(F: SampledField) -> SampledField:
    return fourier(F, "inverse")


# -- exponential sums at affine lattices --------------------------------------

def _axis_exp_sum(c, axis, nu0, dnu, y0, dy, P, sign):
    """out_p = sum_k c_k exp(sign 2 pi i (nu0 + k dnu)(y0 + p dy)) along ``axis``."""
    n = c.shape[axis]
    c = np.moveaxis(c, axis, -1)
    if n * P <= _DENSE_LIMIT or dy == 0.0:
        nu = nu0 + dnu * np.arange(n)
        y = y0 + dy * np.arange(P)
        E = np.exp(sign * 2j * np.pi * np.outer(nu, y))
        out = c @ E
    else:
        W = np.exp(sign * 2j * np.pi * dnu * dy)
        A = np.exp(-sign * 2j * np.pi * dnu * y0)
        out = czt(c, m=P, w=W, a=A, axis=-1)
        out = out * np.exp(sign * 2j * np.pi * nu0 * (y0 + dy * np.arange(P)))
    return np.moveaxis(out, -1, axis)


def exp_sum(coef, node_grid: Grid, sign: int, M, out_grid: Grid, chunk: int = 512) -> np.ndarray:
    """Evaluate sum_k coef_k exp(sign 2 pi i nu_k . (M x_p)).

    ``nu_k`` are the nodes of ``node_grid`` and ``x_p`` the nodes of
    ``out_grid``.  Diagonal M is handled axis by axis (chirp-z or dense); a
    general 2x2 M uses a chunked dense evaluation.
    """
    d = node_grid.d
    M = _as_matrix(M, d)
    coef = np.asarray(coef, dtype=complex).reshape(node_grid.shape)
    nu0, dnu = node_grid.axis[0], node_grid.h
    x0, dx, P = out_grid.axis[0], out_grid.h, out_grid.N
    if d == 1 or np.count_nonzero(M - np.diag(np.diag(M))) == 0:
        out = coef
        for ax in range(d):
            m = M[ax, ax]
            out = _axis_exp_sum(out, ax, nu0, dnu, m * x0, m * dx, P, sign)
        return out
    # general 2x2: T[p, k1] = sum_k2 c[k1, k2] E2[p, k2]; out_p = sum_k1 E1[p, k1] T[p, k1]
    nu = node_grid.axis
    pts = out_grid.points() @ M.T
    out = np.empty(pts.shape[0], dtype=complex)
    step = max(1, int(chunk * 512 // max(node_grid.N, 1)))
    for s in range(0, pts.shape[0], step):
        y = pts[s:s + step]
        E1 = np.exp(sign * 2j * np.pi * np.outer(y[:, 0], nu))
        E2 = np.exp(sign * 2j * np.pi * np.outer(y[:, 1], nu))
        T = E2 @ coef.T
        out[s:s + step] = np.einsum("pk,pk->p", E1, T)
    return out.reshape(out_grid.shape)


def fourier_at(f: SampledField, M, out_grid: Grid | None = None) -> np.ndarray:
    """Riemann-sum transform of f evaluated at M x_p for x_p in out_grid."""
    g = f.grid
    out_grid = out_grid or g
    return exp_sum(f.values, g, -1, M, out_grid) * g.h ** g.d


def inverse_fourier_at(F: SampledField, M, out_grid: Grid) -> np.ndarray:
    """Riemann-sum inverse transform of F (on a frequency grid) at M x_p."""
    g = F.grid
    return exp_sum(F.values, g, +1, M, out_grid) * g.h ** g.d


def interpolate_at(f: SampledField, M, out_grid: Grid | None = None) -> np.ndarray:
    """Trigonometric interpolant of f evaluated at M x_p (x_p in out_grid)."""
    return inverse_fourier_at(fourier(f), M, out_grid or f.grid)


def evaluate(f: SampledField, points) -> np.ndarray:
    """Trigonometric interpolant of f at arbitrary points, shape (P, d)."""
    g = f.grid
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if g.d == 1 and pts.shape[0] == 1 and pts.shape[1] != 1:
        pts = pts.T
    F = fourier(f)
    nu = F.grid.axis
    out = np.empty(pts.shape[0], dtype=complex)
    for s in range(0, pts.shape[0], 256):
        y = pts[s:s + 256]
        if g.d == 1:
            out[s:s + 256] = np.exp(2j * np.pi * np.outer(y[:, 0], nu)) @ F.values
        else:
            E1 = np.exp(2j * np.pi * np.outer(y[:, 0], nu))
            E2 = np.exp(2j * np.pi * np.outer(y[:, 1], nu))
            out[s:s + 256] = np.einsum("pk,pk->p", E1, E2 @ F.values.T)
    return out / g.L ** g.d


# -- resampling ---------------------------------------------------------------

def upsample(f: SampledField, s: int) -> SampledField:
    """Exact trigonometric interpolation onto the grid (d, sN, L)."""
    if s == 1:
        return f
    g = f.grid
    F = fourier(f).values
    big = np.zeros((g.N * s,) * g.d, dtype=complex)
    lo = (g.N * s - g.N) // 2
    big[(slice(lo, lo + g.N),) * g.d] = F
    fine = Grid(g.d, g.N * s, g.L)
    return SampledField(fine, _centered_fft(big, inverse=True) * (1.0 / g.L) ** g.d)


def downsample(f: SampledField, s: int) -> SampledField:
    """Keep every s-th node; inverse of ``upsample`` on band-limited data."""
    if s == 1:
        return f
    g = f.grid
    return SampledField(Grid(g.d, g.N // s, g.L), f.values[(slice(None, None, s),) * g.d])


def zero_pad(f: SampledField, s: int) -> SampledField:
    """Embed f in the centered box of side sL (same spacing h)."""
    if s == 1:
        return f
    g = f.grid
    big = np.zeros((g.N * s,) * g.d, dtype=complex)
    lo = (g.N * s - g.N) // 2
    big[(slice(lo, lo + g.N),) * g.d] = f.values
    return SampledField(Grid(g.d, g.N * s, g.L * s), big)


def crop(f: SampledField, s: int) -> SampledField:
    """Inverse of ``zero_pad``: the central N/s nodes per axis."""
    if s == 1:
        return f
    g = f.grid
    n = g.N // s
    lo = (g.N - n) // 2
    return SampledField(Grid(g.d, n, g.L / s), f.values[(slice(lo, lo + n),) * g.d])


def support_radius(f: SampledField, rel: float = SUPPORT_THRESHOLD) -> float:
    """Largest sup-norm |x| among nodes with |f| >= rel * max|f| (0 for f = 0)."""
    a = np.abs(f.values)
    m = a.max()
    if m == 0:
        return 0.0
    mask = a >= rel * m
    r = 0.0
    for c in f.grid.coords():
        r = max(r, float(np.max(np.abs(c[mask]))))
    return r


def spectral_radius(f: SampledField, rel: float = SUPPORT_THRESHOLD) -> float:
    return support_radius(fourier(f), rel)


def edge_leak(f: SampledField, frac: float = 1 / 16) -> float:
    """Max relative amplitude of f and of its transform within the outer band of each box."""
    worst = 0.0
    for F in (f, fourier(f)):
        a = np.abs(F.values)
        m = a.max()
        if m == 0:
            continue
        half = F.grid.L / 2
        band = np.zeros(F.grid.shape, dtype=bool)
        for c in F.grid.coords():
            band |= np.abs(c) >= half * (1 - 2 * frac)
        worst = max(worst, float(a[band].max() / m))
    return worst


# -- elementary operators -----------------------------------------------------

def translate(f: SampledField, x0) -> SampledField:
    """T_{x0} f (circular shift); x0 must be a multiple of h."""
    g = f.grid
    x0 = np.broadcast_to(np.asarray(x0, dtype=float), (g.d,))
    k = x0 / g.h
    kr = np.rint(k)
    if np.max(np.abs(k - kr)) > 1e-9:
        raise DomainError(f"translation {x0.tolist()} is not a multiple of h={g.h}")
    return SampledField(g, np.roll(f.values, tuple(int(v) for v in kr), axis=tuple(range(g.d))))


def modulate(f: SampledField, xi0) -> SampledField:
    """M_{xi0} f = exp(2 pi i xi0 . t) f."""
    g = f.grid
    xi0 = np.broadcast_to(np.asarray(xi0, dtype=float), (g.d,))
    ph = sum(xi0[i] * c for i, c in enumerate(g.coords()))
    return SampledField(g, f.values * np.exp(2j * np.pi * ph))


def dilate_unitary(f: SampledField, A, warn: bool = True) -> SampledField:
    """|det A|^{1/2} f(A t) via trigonometric interpolation.

    If A compresses (so that A t leaves the box) the field is zero-padded
    first, which keeps the periodic images of f out of the sampled region.
    """
    g = f.grid
    A = _as_matrix(A, g.d)
    det = np.linalg.det(A)
    if abs(det) < 1e-14 * max(1.0, np.linalg.norm(A) ** g.d):
        raise SingularityError("dilation matrix is singular")
    nA = np.linalg.norm(A, np.inf)
    if warn:
        # the spectrum of f(A .) sits at A^T xi
        out_band = np.linalg.norm(A.T, np.inf) * spectral_radius(f)
        if out_band >= g.nyquist:
            warnings.warn("dilated field exceeds the grid Nyquist band", NyquistWarning, stacklevel=2)
    rx = support_radius(f)
    s = 1
    while s * g.L - rx <= nA * g.L / 2:
        s *= 2
    src = zero_pad(f, s)
    vals = interpolate_at(src, A, g)
    return SampledField(g, math.sqrt(abs(det)) * vals)


def multiply(f: SampledField, g: SampledField) -> SampledField:
    _same_grid(f, g)
    return SampledField(f.grid, f.values * g.values)


def convolve(f: SampledField, g: SampledField) -> SampledField:
    """Circular convolution scaled by h^d, approximating int f(y) g(x - y) dy."""
    _same_grid(f, g)
    gr = f.grid
    ax = tuple(range(gr.d))
    fv = np.fft.ifftshift(f.values, axes=ax)
    gv = np.fft.ifftshift(g.values, axes=ax)
    c = np.fft.ifftn(np.fft.fftn(fv, axes=ax) * np.fft.fftn(gv, axes=ax), axes=ax)
    return SampledField(gr, np.fft.fftshift(c, axes=ax) * gr.h ** gr.d)


def inner(f: SampledField, g: SampledField) -> complex:
    """<f, g> = h^d sum f conj(g)."""
    _same_grid(f, g)
    return complex(np.vdot(g.values, f.values) * f.grid.h ** f.grid.d)


def l2_norm(f: SampledField) -> float:
    return float(np.linalg.norm(f.values.ravel()) * f.grid.h ** (f.grid.d / 2))


def l1_norm(f: SampledField) -> float:
    return float(np.sum(np.abs(f.values)) * f.grid.h ** f.grid.d)


def sup_norm(f: SampledField) -> float:
    return float(np.max(np.abs(f.values)))


def phase_align(reference: SampledField, v: SampledField) -> SampledField:
    """Multiply v by the unimodular constant that makes <reference, v> real and >= 0."""
    ip = inner(reference, v)
    if ip == 0:
        return v
    return v * (ip / abs(ip))


def aligned_error(reference: SampledField, v: SampledField) -> float:
    """Relative L2 distance after optimal global-phase alignment."""
    w = phase_align(reference, v)
    return l2_norm(w - reference) / l2_norm(reference)


# -- serialization ------------------------------------------------------------

def save_field_csv(f: SampledField, path) -> None:
    """Header row ``d,N,L``, then one ``re,im`` row per node in row-major order."""
    g = f.grid
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["d", "N", "L"])
        w.writerow([g.d, g.N, repr(g.L)])
        w.writerow(["re", "im"])
        for z in f.values.ravel():
            w.writerow([repr(float(z.real)), repr(float(z.imag))])


def load_field_csv(path) -> SampledField:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if [c.strip() for c in rows[0]] != ["d", "N", "L"]:
        raise DimensionError("field CSV must start with header d,N,L")
    d, N, L = int(rows[1][0]), int(rows[1][1]), float(rows[1][2])
    data = np.array([[float(a), float(b)] for a, b in rows[3:]])
    grid = Grid(d, N, L)
    if data.shape[0] != grid.size:
        raise DimensionError(f"expected {grid.size} samples, got {data.shape[0]}")
    return SampledField(grid, data[:, 0] + 1j * data[:, 1])


def save_field_npz(f: SampledField, path) -> None:
    g = f.grid
    np.savez(path, d=g.d, N=g.N, L=g.L, values=f.values)


def load_field_npz(path) -> SampledField:
    z = np.load(path)
    return SampledField(Grid(int(z["d"]), int(z["N"]), float(z["L"])), z["values"])
