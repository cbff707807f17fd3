"""Metaplectic operators on sampled fields and quadratic-Hamiltonian propagators.

Sign convention: with S = (A, B; C, D) and det B != 0,

    mu(S) f(x) = c_B  int exp(pi i x.DB^{-1}x - 2 pi i y.B^{-1}x + pi i y.B^{-1}A y) f(y) dy,

so that mu(J) = (-i)^{d/2} F and mu((I, 0; C, I)) f = exp(pi i Cx.x) f.  The
unimodular constant c_B (a branch of (-i)^{d/2} (det B)^{-1/2}) is only
meaningful up to the global phase ambiguity of the metaplectic cover; all
comparisons are made after optimal phase alignment.

Routes
------
b-invertible      chirp, Riemann-sum Fourier transform evaluated at B^{-1}x, chirp
fourier-side      chirp on the Fourier side, inverse transform evaluated at A^{-1}x, chirp
hybrid            direct chirp convolution evaluated at A^{-1}x, chirp
dense-kernel      direct quadrature of the full kernel above
lower-triangular  multiplication by exp(pi i Cx.x)        (A = D = I, B = 0)
block-diagonal    (det A)^{-1/2} f(A^{-1}x)                (B = C = 0)

The factorized routes oversample the input (spectral upsampling for
b-invertible/hybrid/dense, zero padding for fourier-side) by the smallest
power of two that keeps every Riemann sum alias-free for the input's
estimated phase-space box.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bounds import _check_t, classical_bound
from .errors import DimensionError, DomainError, NyquistWarning, RouteError, SingularityError
from .field import (Grid, SampledField, _quad, dilate_unitary, edge_leak, fourier, fourier_at,
                    inverse_fourier_at, l1_norm, spectral_radius, sup_norm, support_radius, upsample,
                    zero_pad)
from .symplectic import (SymplecticMatrix, exp_scaled, free_generator, harmonic_generator,
                         repulsive_generator)

ROUTES = ("b-invertible", "fourier-side", "hybrid", "lower-triangular", "block-diagonal", "dense-kernel")
ALIASES = {"f3": "b-invertible", "f4": "fourier-side", "f5": "hybrid", "lower": "lower-triangular",
           "block": "block-diagonal", "dense": "dense-kernel"}
MARGIN = 1.05
MAX_POINTS = {1: 1 << 17, 2: 1 << 10}      # cap on oversampled points per axis
DENSE_MAX_N = {1: 1024, 2: 128}            # input size limit of the quadrature routes
DENSE_MAX_POINTS = {1: 1 << 13, 2: 256}
LEAK_WARN = 1e-7


def _ninf(M) -> float:
    return float(np.linalg.norm(M, np.inf))


def _is_zero(M, scale) -> bool:
    return float(np.max(np.abs(M))) <= 1e-12 * scale


def _invertible(M) -> bool:
    d = M.shape[0]
    return abs(np.linalg.det(M)) > 1e-10 * max(1.0, np.linalg.norm(M, 2)) ** d


def _pow2_at_least(x: float) -> int:
    s = 1
    while s < x:
        s *= 2
    return s


def _sym(M):
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class MetaplecticPlan:
    matrix: SymplecticMatrix
    route: str
    oversample: int
    phase: dict = field(default_factory=dict)


def valid_routes(S: SymplecticMatrix) -> list[str]:
    A, B, C, D = S.A, S.B, S.C, S.D
    d = S.d
    scale = max(1.0, float(np.max(np.abs(S.matrix))))
    I = np.eye(d)
    out = []
    detB, detA = _invertible(B), _invertible(A)
    if detB:
        out += ["b-invertible", "dense-kernel"]
    if detA:
        out.append("fourier-side")
    if detA and detB:
        out.append("hybrid")
    if _is_zero(B, scale) and _is_zero(A - I, scale) and _is_zero(D - I, scale):
        out.append("lower-triangular")
    if _is_zero(B, scale) and _is_zero(C, scale):
        out.append("block-diagonal")
    return [r for r in ROUTES if r in out]


def _oversampling(route: str, S: SymplecticMatrix, grid: Grid, rx: float, rk: float) -> int:
    """Smallest power-of-two oversampling that keeps the route alias-free."""
    L, h = grid.L, grid.h
    A, B = S.A, S.B
    if route in ("b-invertible", "dense-kernel"):
        Bi = np.linalg.inv(B)
        rg = rk + _ninf(Bi @ A) * rx
        need = MARGIN * max(_ninf(Bi) * L / 2 + rg, 2 * rg)   # needed 1/h_s
        return _pow2_at_least(need * h)
    if route == "fourier-side":
        Ai = np.linalg.inv(A)
        rkk = rx + _ninf(Ai @ B) * rk
        need = MARGIN * max(_ninf(Ai) * L / 2 + rkk, 2 * rkk)  # needed padded side
        return _pow2_at_least(need / L)
    if route == "hybrid":
        Ai = np.linalg.inv(A)
        M = np.linalg.solve(B, A)
        band = _ninf(M) * (_ninf(Ai) * L / 2 + rx) + rk
        return _pow2_at_least(MARGIN * max(band, 2 * rk) * h)
    return 1


def plan(S: SymplecticMatrix, f: SampledField, route: str | None = None) -> MetaplecticPlan:
    if not isinstance(S, SymplecticMatrix):
        S = SymplecticMatrix(np.asarray(S, dtype=float))
    g = f.grid
    if S.d != g.d:
        raise DimensionError(f"matrix dimension {S.d} != grid dimension {g.d}")
    routes = valid_routes(S)
    rx, rk = support_radius(f), spectral_radius(f)
    cap = MAX_POINTS[g.d]
    if route is not None:
        route = ALIASES.get(route, route)
        if route not in ROUTES:
            raise RouteError(f"unknown route {route!r}", routes)
        if route not in routes:
            if route in ("b-invertible", "dense-kernel", "hybrid") and not _invertible(S.B):
                raise SingularityError(f"route {route} needs det B != 0")
            if route in ("fourier-side", "hybrid") and not _invertible(S.A):
                raise SingularityError(f"route {route} needs det A != 0")
            raise RouteError(f"route {route!r} is not available for this matrix", routes)
        s = _oversampling(route, S, g, rx, rk)
        if route in ("hybrid", "dense-kernel"):
            if g.N > DENSE_MAX_N[g.d] or s * g.N > DENSE_MAX_POINTS[g.d]:
                raise RouteError(f"quadrature route too large (N={g.N}, oversampling {s})", routes)
        elif s * g.N > cap:
            raise RouteError(f"route {route} needs oversampling {s} beyond the size cap", routes)
    else:
        if "block-diagonal" in routes:
            route, s = "block-diagonal", 1
        elif "lower-triangular" in routes:
            route, s = "lower-triangular", 1
        else:
            best = None
            for r in ("b-invertible", "fourier-side"):
                if r in routes:
                    sr = _oversampling(r, S, g, rx, rk)
                    if sr * g.N <= cap and (best is None or sr < best[1]):
                        best = (r, sr)
            if best is None:
                raise RouteError("no factorized route fits the size cap for this input", routes)
            route, s = best
    d = g.d
    phase = {"i_power": "(-i)^{d/2} = exp(-i pi d/4)", "det_branch": "principal sqrt of complex det",
             "d": d}
    return MetaplecticPlan(S, route, s, phase)


def _cB(B, d) -> complex:
    # (-i)^{d/2} conj((det B)^{-1/2}), principal branches
    return complex(np.exp(-1j * np.pi * d / 4) * np.conj(complex(np.linalg.det(B)) ** -0.5))


def _run(pl: MetaplecticPlan, f: SampledField) -> np.ndarray:
    S, s, g = pl.matrix, pl.oversample, f.grid
    A, B, C, D = S.A, S.B, S.C, S.D
    d = g.d
    xs = g.coords()
    route = pl.route
    if route == "lower-triangular":
        return f.values * np.exp(1j * np.pi * _quad(_sym(C), xs))
    if route == "block-diagonal":
        Ai = np.linalg.inv(A)
        det = np.linalg.det(A)
        ph = np.conj(complex(det) ** -0.5) * math.sqrt(abs(det))
        return dilate_unitary(f, Ai, warn=False).values * ph
    if route == "b-invertible":
        Bi = np.linalg.inv(B)
        fs = upsample(f, s)
        gv = fs.values * np.exp(1j * np.pi * _quad(_sym(Bi @ A), fs.grid.coords()))
        vals = fourier_at(SampledField(fs.grid, gv), Bi, g)
        return _cB(B, d) * np.exp(1j * np.pi * _quad(_sym(D @ Bi), xs)) * vals
    if route == "fourier-side":
        Ai = np.linalg.inv(A)
        F = fourier(zero_pad(f, s))
        Fv = F.values * np.exp(-1j * np.pi * _quad(_sym(Ai @ B), F.grid.coords()))
        vals = inverse_fourier_at(SampledField(F.grid, Fv), Ai, g)
        pref = np.conj(complex(np.linalg.det(A)) ** -0.5)
        return pref * np.exp(1j * np.pi * _quad(_sym(C @ Ai), xs)) * vals
    if route == "hybrid":
        Ai = np.linalg.inv(A)
        M = _sym(np.linalg.solve(B, A))
        fs = upsample(f, s)
        ys = fs.grid.points()
        fv = fs.values.ravel()
        z = g.points() @ Ai.T
        conv = np.empty(z.shape[0], dtype=complex)
        step = max(1, (1 << 21) // ys.shape[0])
        for a in range(0, z.shape[0], step):
            dz = z[a:a + step, None, :] - ys[None, :, :]
            q = np.einsum("pki,ij,pkj->pk", dz, M, dz)
            conv[a:a + step] = np.exp(1j * np.pi * q) @ fv
        conv = conv.reshape(g.shape) * fs.grid.h ** d
        pref = complex(1j * np.linalg.det(B)) ** -0.5
        return pref * np.exp(1j * np.pi * _quad(_sym(C @ Ai), xs)) * conv
    if route == "dense-kernel":
        Bi = np.linalg.inv(B)
        fs = upsample(f, s)
        ys = fs.grid.points()
        yq = np.einsum("ki,ij,kj->k", ys, _sym(Bi @ A), ys)
        fv = fs.values.ravel() * np.exp(1j * np.pi * yq)
        x = g.points()
        xq = np.einsum("pi,ij,pj->p", x, _sym(D @ Bi), x)
        u = x @ Bi.T
        out = np.empty(x.shape[0], dtype=complex)
        step = max(1, (1 << 21) // ys.shape[0])
        for a in range(0, x.shape[0], step):
            K = np.exp(1j * np.pi * xq[a:a + step, None] - 2j * np.pi * (u[a:a + step] @ ys.T))
            out[a:a + step] = K @ fv
        return _cB(B, d) * fs.grid.h ** d * out.reshape(g.shape)
    raise RouteError(f"unknown route {route!r}", ROUTES)


def apply(S, f: SampledField, route: str | None = None, warn: bool = True) -> SampledField:
    """mu(S) f on f's grid."""
    pl = plan(S, f, route)
    if warn and edge_leak(f) > LEAK_WARN:
        warnings.warn("input field is not resolved by its grid (energy near box or band edge)",
                      NyquistWarning, stacklevel=2)
    out = SampledField(f.grid, _run(pl, f))
    if warn and edge_leak(out) > LEAK_WARN:
        warnings.warn("output reaches the box or band edge; enlarge L or N", NyquistWarning, stacklevel=2)
    return out


# -- propagators ------------------------------------------------------------------

def generator(kind: str, d: int, B=None):
    if kind == "harmonic":
        return harmonic_generator(d)
    if kind == "repulsive":
        return repulsive_generator(d)
    if kind == "free":
        return free_generator(np.eye(d) if B is None else B)
    raise DomainError(f"unknown kind {kind!r}")


def propagator_matrix(kind: str, t: float, d: int, B=None) -> SymplecticMatrix:
    return exp_scaled(generator(kind, d, B), t)


def propagate(kind: str, t: float, u0: SampledField, B=None, eps_t: float = 1e-3,
              route: str | None = None, warn: bool = True) -> SampledField:
    """u(t) = mu(exp(t A_kind)) u0."""
    _check_t(kind, t, eps_t)
    return apply(propagator_matrix(kind, t, u0.grid.d, B), u0, route, warn=warn)


def classical_dispersive_check(kind: str, t: float, u0: SampledField, B=None, eps_t: float = 1e-3,
                               route: str | None = None) -> float:
    """sup|u(t)| / (kernel bound(t) * ||u0||_{L^1}); at most 1 up to discretization."""
    u = propagate(kind, t, u0, B, eps_t, route)
    return sup_norm(u) / (classical_bound(kind, t, u0.grid.d, B) * l1_norm(u0))
