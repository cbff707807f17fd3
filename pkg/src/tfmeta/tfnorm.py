"""Short-time Fourier transforms and the mixed norms built on them.

    V_g f(x, xi) = int f(y) g(y - x) exp(-2 pi i xi . y) dy

is computed one x-slice at a time as the grid Fourier transform of f T_x g.
Modulation norms integrate in x first (L^p), then in xi (L^q); Wiener
amalgam norms W(FL^p, L^q) integrate in xi first, then in x.  The default
window is the Gaussian exp(-pi |t|^2) sampled on the field's grid.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.fft as sfft

from .errors import CoverageError, DimensionError, DomainError
from .field import Grid, SampledField, _as_matrix, gaussian, l2_norm

INF = math.inf
COVERAGE_TAIL = 1e-10
_BATCH_ELEMS = 1 << 22


# -- exponents ----------------------------------------------------------------

def reciprocal(p) -> Fraction:
    """Exact 1/p for p in [1, inf]; accepts ints, Fractions, floats and strings."""
    if isinstance(p, str):
        s = p.strip().lower()
        if s in ("inf", "infinity", "∞", "oo"):
            return Fraction(0)
        p = Fraction(s)
    elif isinstance(p, float):
        if math.isinf(p):
            if p < 0:
                raise DomainError("exponent must be >= 1")
            return Fraction(0)
        p = Fraction(repr(p))
    p = Fraction(p)
    if p < 1:
        raise DomainError(f"exponent must lie in [1, inf], got {p}")
    return 1 / p


def from_reciprocal(r: Fraction):
    return INF if r == 0 else 1 / Fraction(r)


@dataclass(frozen=True)
class IndexPair:
    """Exponent pair (p, q) stored through exact reciprocals 1/p, 1/q."""
    inv_p: Fraction
    inv_q: Fraction

    def __post_init__(self):
        for name in ("inv_p", "inv_q"):
            v = Fraction(getattr(self, name))
            if not (0 <= v <= 1):
                raise DomainError(f"{name} must lie in [0, 1], got {v}")
            object.__setattr__(self, name, v)

    @classmethod
    def of(cls, p, q) -> "IndexPair":
        return cls(reciprocal(p), reciprocal(q))

    @property
    def p(self):
        return from_reciprocal(self.inv_p)

    @property
    def q(self):
        return from_reciprocal(self.inv_q)

    def conjugate(self) -> "IndexPair":
        return IndexPair(1 - self.inv_p, 1 - self.inv_q)

    def as_floats(self) -> tuple[float, float]:
        return float(self.p), float(self.q)

    def __str__(self):
        f = lambda v: "inf" if v == INF else str(v)
        return f"({f(self.p)},{f(self.q)})"


def conjugate_exponent(p):
    return from_reciprocal(1 - reciprocal(p))


# -- spectrogram ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Spectrogram:
    """V_g f on the product lattice x_axis^d x xi_axis^d."""
    d: int
    x_axis: np.ndarray
    xi_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        want = (len(self.x_axis),) * self.d + (len(self.xi_axis),) * self.d
        if self.values.shape != want:
            raise DimensionError(f"spectrogram shape {self.values.shape} != {want}")

    @property
    def dx(self) -> float:
        return float(self.x_axis[1] - self.x_axis[0]) if len(self.x_axis) > 1 else 1.0

    @property
    def dxi(self) -> float:
        return float(self.xi_axis[1] - self.xi_axis[0]) if len(self.xi_axis) > 1 else 1.0

    def to_csv(self, path) -> None:
        d = self.d
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i + 1}" for i in range(d)] + [f"xi{i + 1}" for i in range(d)] + ["re", "im"])
            for idx in np.ndindex(self.values.shape):
                xs = [repr(float(self.x_axis[i])) for i in idx[:d]]
                ks = [repr(float(self.xi_axis[i])) for i in idx[d:]]
                z = self.values[idx]
                w.writerow(xs + ks + [repr(float(z.real)), repr(float(z.imag))])


def gaussian_window(grid: Grid, normalized: bool = False) -> SampledField:
    g = gaussian(grid)
    return g * (1.0 / l2_norm(g)) if normalized else g


def _stride(step, base, what) -> int:
    if step is None:
        return 1
    k = step / base
    kr = round(k)
    if kr < 1 or abs(k - kr) > 1e-9:
        raise DomainError(f"{what} step {step} is not a positive multiple of {base}")
    return int(kr)


@dataclass(frozen=True)
class _Lattice:
    grid: Grid
    x_idx: np.ndarray     # node indices of the x-lattice (per axis)
    xi_idx: np.ndarray    # dual-node indices of the xi-lattice (per axis)
    x_axis: np.ndarray
    xi_axis: np.ndarray


def _lattice(grid: Grid, dx=None, dxi=None, x_extent=None) -> _Lattice:
    sx = _stride(dx, grid.h, "x")
    sk = _stride(dxi, 1.0 / grid.L, "xi")
    c = grid.N // 2
    # symmetric about the origin node
    xi = np.concatenate([np.arange(c, -1, -sx)[::-1], np.arange(c + sx, grid.N, sx)])
    x_axis = grid.axis[xi]
    if x_extent is not None:
        keep = np.abs(x_axis) <= x_extent + 1e-12
        xi, x_axis = xi[keep], x_axis[keep]
    ki = np.concatenate([np.arange(c, -1, -sk)[::-1], np.arange(c + sk, grid.N, sk)])
    return _Lattice(grid, xi, ki, x_axis, grid.dual().axis[ki])


def _window_for(f: SampledField, window) -> np.ndarray:
    if window is None:
        return gaussian(f.grid).values
    if window.grid != f.grid:
        raise DimensionError("window must live on the field's grid")
    return window.values


def _alt(n: int) -> np.ndarray:
    return 1.0 - 2.0 * (np.arange(n) % 2)


def _stft_batches(f: SampledField, window, lat: _Lattice):
    """Yield (list of x multi-indices into the lattice, V for those x-slices).

    The centered transform of a length-N vector (N % 4 == 0) equals
    (-1)^m * DFT((-1)^n * v), so the shifts are folded into sign flips.
    """
    g = f.grid
    d, N = g.d, g.N
    w = _window_for(f, window)
    sgn = _alt(N)
    if d == 1:
        fv = f.values * sgn
        wd = np.concatenate([w, w])
    else:
        fv = f.values * np.outer(sgn, sgn)
        wd = np.tile(w, (2, 2))
    ks = sgn[lat.xi_idx]
    out_sign = ks if d == 1 else np.outer(ks, ks)
    nx = len(lat.x_idx)
    xs = list(np.ndindex(*(nx,) * d))
    per = max(1, _BATCH_ELEMS // g.size)
    axes = tuple(range(1, d + 1))
    sel = (slice(None),) + np.ix_(*([lat.xi_idx] * d))
    scale = g.h ** d
    buf = np.empty((min(per, len(xs)),) + g.shape, dtype=complex)
    for s in range(0, len(xs), per):
        chunk = xs[s:s + per]
        b = buf[:len(chunk)]
        for j, mi in enumerate(chunk):
            # T_x w for x at node offset o is w[(n - o) mod N], a view into the tiled window
            o = [N - (lat.x_idx[i] - N // 2) % N for i in mi]
            if d == 1:
                b[j] = fv * wd[o[0]:o[0] + N]
            else:
                b[j] = fv * wd[o[0]:o[0] + N, o[1]:o[1] + N]
        V = sfft.fftn(b, axes=axes, workers=-1)
        yield chunk, V[sel] * (out_sign * scale)


def stft(f: SampledField, window: SampledField | None = None, dx=None, dxi=None, x_extent=None) -> Spectrogram:
    """Sampled STFT on the lattice (dx Z)^d x (dxi Z)^d inside the grid boxes."""
    lat = _lattice(f.grid, dx, dxi, x_extent)
    d = f.grid.d
    out = np.empty((len(lat.x_idx),) * d + (len(lat.xi_idx),) * d, dtype=complex)
    for chunk, V in _stft_batches(f, window, lat):
        for j, mi in enumerate(chunk):
            out[mi] = V[j]
    return Spectrogram(d, lat.x_axis, lat.xi_axis, out)


def gaussian_stft_oracle(A, x, xi) -> complex:
    """Closed form of V_phi phi_A(x, xi) with phi(t) = exp(-pi|t|^2), phi_A(t) = phi(A t)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    d = x.size
    A = _as_matrix(A, d)
    S = A.T @ A + np.eye(d)
    Si = np.linalg.inv(S)
    amp = np.linalg.det(S) ** -0.5
    return complex(amp * np.exp(-np.pi * x @ (np.eye(d) - Si) @ x
                                - 2j * np.pi * xi @ Si @ x
                                - np.pi * xi @ Si @ xi))


# -- norms --------------------------------------------------------------------

def _lp(a, p, weight, axis=None):
    """Riemann-weighted L^p of |a| (p may be INF)."""
    if p == INF:
        return np.max(a, axis=axis)
    p = float(p)
    return (np.sum(a ** p, axis=axis) * weight) ** (1.0 / p)


def _band_mask(axis_vals, half):
    return np.abs(axis_vals) >= 0.875 * half


class _Coverage:
    def __init__(self, lat: _Lattice, check_x: bool):
        g = lat.grid
        d = g.d
        self.total = 0.0
        self.tail = 0.0
        xb = _band_mask(lat.x_axis, g.L / 2) if check_x else np.zeros(len(lat.x_axis), bool)
        self.xband = xb
        kb = _band_mask(lat.xi_axis, g.nyquist)
        m = np.zeros((len(lat.xi_axis),) * d, dtype=bool)
        for ax in range(d):
            shp = [1] * d
            shp[ax] = -1
            m = m | kb.reshape(shp)
        self.kmask = m
        self.lat = lat

    def add(self, chunk, A2):
        tot = A2.reshape(len(chunk), -1).sum(axis=1)
        self.total += float(tot.sum())
        inx = np.array([any(self.xband[i] for i in mi) for mi in chunk])
        tail = float(tot[inx].sum())
        if (~inx).any():
            tail += float(A2[~inx][:, self.kmask].sum())
        self.tail += tail

    def check(self):
        if self.total == 0:
            return 0.0
        r = self.tail / self.total
        if r > COVERAGE_TAIL:
            raise CoverageError(f"STFT lattice misses essential support: tail mass ratio {r:.3e}", tail_mass=r)
        return r


def _prep(f, pairs, dx, dxi, x_extent):
    pairs = [pr if isinstance(pr, IndexPair) else IndexPair.of(*pr) for pr in pairs]
    return pairs, _lattice(f.grid, dx, dxi, x_extent)


def _steps(lat):
    dxv = (lat.x_axis[1] - lat.x_axis[0]) if len(lat.x_axis) > 1 else 1.0
    return dxv, lat.xi_axis[1] - lat.xi_axis[0]


def modulation_norms(f: SampledField, pairs, window=None, dx=None, dxi=None, x_extent=None,
                     check_coverage: bool = True) -> list[float]:
    """Several M^{p,q} norms from a single pass over the STFT."""
    pairs, lat = _prep(f, pairs, dx, dxi, x_extent)
    d = f.grid.d
    dxv, dkv = _steps(lat)
    ps = sorted({pr.p for pr in pairs})
    acc = {p: np.zeros((len(lat.xi_idx),) * d) for p in ps}
    cov = _Coverage(lat, x_extent is None) if check_coverage else None
    for chunk, V in _stft_batches(f, window, lat):
        a = np.abs(V)
        if cov is not None:
            cov.add(chunk, a * a)
        for p in ps:
            if p == INF:
                acc[p] = np.maximum(acc[p], a.max(axis=0))
            else:
                acc[p] = acc[p] + np.sum(a ** float(p), axis=0)
    if cov is not None:
        cov.check()
    out = []
    for pr in pairs:
        p = pr.p
        inner = acc[p] if p == INF else (acc[p] * dxv ** d) ** (1.0 / float(p))
        out.append(float(_lp(inner.ravel(), pr.q, dkv ** d)))
    return out


def wiener_amalgam_norms(f: SampledField, pairs, window=None, dx=None, dxi=None, x_extent=None,
                         check_coverage: bool = True) -> list[float]:
    """Several W(FL^p, L^q) norms from a single pass over the STFT."""
    pairs, lat = _prep(f, pairs, dx, dxi, x_extent)
    d = f.grid.d
    dxv, dkv = _steps(lat)
    ps = sorted({pr.p for pr in pairs})
    slices = {p: [] for p in ps}
    cov = _Coverage(lat, x_extent is None) if check_coverage else None
    for chunk, V in _stft_batches(f, window, lat):
        a = np.abs(V)
        if cov is not None:
            cov.add(chunk, a * a)
        flat = a.reshape(len(chunk), -1)
        for p in ps:
            slices[p].append(_lp(flat, p, dkv ** d, axis=1))
    if cov is not None:
        cov.check()
    return [float(_lp(np.concatenate(slices[pr.p]), pr.q, dxv ** d)) for pr in pairs]


def modulation_norm(f: SampledField, idx, window=None, dx=None, dxi=None, x_extent=None,
                    check_coverage: bool = True) -> float:
    """|| || V_g f(., xi) ||_{L^p} ||_{L^q} on the sampling lattice."""
    return modulation_norms(f, [idx], window, dx, dxi, x_extent, check_coverage)[0]


def wiener_amalgam_norm(f: SampledField, idx, window=None, dx=None, dxi=None, x_extent=None,
                        check_coverage: bool = True) -> float:
    """|| || V_g f(x, .) ||_{L^p} ||_{L^q_x} on the sampling lattice."""
    return wiener_amalgam_norms(f, [idx], window, dx, dxi, x_extent, check_coverage)[0]


def dilated_gaussian_mod_norm_oracle(A, idx) -> float:
    """Closed-form M^{p,q} norm of phi_A with the window phi."""
    if not isinstance(idx, IndexPair):
        idx = IndexPair.of(*idx)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    d = A.shape[0]
    ip, iq = float(idx.inv_p), float(idx.inv_q)

    def pw(inv):  # p^{-d/(2p)} = exp((d/2) (1/p) log(1/p)), -> 1 as p -> inf
        return 1.0 if inv == 0 else math.exp(0.5 * d * inv * math.log(inv))

    detA = abs(np.linalg.det(A))
    S = np.linalg.det(A.T @ A + np.eye(d))
    return pw(ip) * pw(iq) * detA ** (-ip) * S ** (-(1 - iq - ip) / 2)


def chirp_wiener_norm_oracle(R) -> float:
    """W(FL^1, L^inf) norm of exp(-pi i R y.y): |det(I + iR)|^{1/2}."""
    R = np.atleast_2d(np.asarray(R, dtype=float))
    d = R.shape[0]
    return float(abs(np.linalg.det(np.eye(d) + 1j * R)) ** 0.5)


def lorentz_norm(values, weights, p, q) -> float:
    """Lorentz quasi-norm via the weighted decreasing rearrangement.

    With |values| sorted decreasingly (v_j) and t_j the cumulative weight,
    the integral (q/p) int (t^{1/p} f*(t))^q dt/t is exactly
    sum_j v_j^q (t_j^{q/p} - t_{j-1}^{q/p}); for q = inf it is max_j t_j^{1/p} v_j.
    """
    v = np.abs(np.asarray(values, dtype=complex)).ravel()
    if v.size == 0:
        raise DomainError("empty sample set")
    w = np.broadcast_to(np.asarray(weights, dtype=float), v.shape).ravel()
    ip, iq = reciprocal(p), reciprocal(q)
    if ip == 0 and iq != 0:
        raise DomainError("p = inf requires q = inf")
    order = np.argsort(-v, kind="stable")
    v, w = v[order], w[order]
    t = np.cumsum(w)
    if ip == 0:
        return float(v.max())
    fp = float(ip)
    if iq == 0:
        return float(np.max(t ** fp * v))
    r = float(ip / iq)  # q/p
    tq = t ** r
    inc = np.diff(np.concatenate([[0.0], tq]))
    return float(np.sum(v ** float(1 / iq) * inc) ** float(iq))


def mixed_time_norm(fields, T: float, q, idx, window=None, **kw) -> float:
    """L^{q/2}([0, T]) of the per-slice W(FL^p, L^r) norms on a uniform time grid."""
    fields = list(fields)
    if not fields:
        raise DomainError("no time slices")
    inner = np.array([wiener_amalgam_norm(u, idx, window, **kw) for u in fields])
    dt = T / len(fields)
    iq = reciprocal(q)
    if iq == 0:
        return float(inner.max())
    e = float(1 / (iq * 2)) if iq != 0 else INF  # q/2
    return float((np.sum(inner ** e) * dt) ** (1.0 / e))


def time_samples(T: float, steps: int) -> np.ndarray:
    """Midpoint times (j + 1/2) T / steps, which avoid t = 0."""
    return (np.arange(steps) + 0.5) * (T / steps)
