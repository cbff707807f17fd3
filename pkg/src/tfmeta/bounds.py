"""Index functions, region classification and norm-bound constants.

All exponent arithmetic is exact: pairs are handled through 1/p, 1/q as
Fractions with 1/inf = 0.  Suppressed universal constants are taken as 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import AdmissibilityError, ContractError, DomainError, SingularityError
from .tfnorm import INF, IndexPair, reciprocal

HALF = Fraction(1, 2)
REGIONS = ("I1", "I1*", "I2", "I2*", "I3", "I3*")


def _pair(idx) -> IndexPair:
    return idx if isinstance(idx, IndexPair) else IndexPair.of(*idx)


def classify_region(idx) -> frozenset:
    """All region labels containing (1/p, 1/q)."""
    idx = _pair(idx)
    a, b = idx.inv_p, idx.inv_q
    a_c = 1 - a  # 1/p'
    labels = set()
    if max(a, a_c) <= b:
        labels.add("I1")
    if min(a, a_c) >= b:
        labels.add("I1*")
    if max(b, HALF) <= a_c:
        labels.add("I2")
    if min(b, HALF) >= a_c:
        labels.add("I2*")
    if max(b, HALF) <= a:
        labels.add("I3")
    if min(b, HALF) >= a:
        labels.add("I3*")
    return frozenset(labels)


def _branch_values(idx: IndexPair, starred: bool) -> list[Fraction]:
    a, b = idx.inv_p, idx.inv_q
    labels = classify_region(idx)
    suffix = "*" if starred else ""
    vals = []
    if "I1" + suffix in labels:
        vals.append(-a)
    if "I2" + suffix in labels:
        vals.append(b - 1)
    if "I3" + suffix in labels:
        vals.append(-2 * a + b)
    return vals


def _mu(idx, starred: bool) -> Fraction:
    idx = _pair(idx)
    vals = _branch_values(idx, starred)
    if not vals:
        raise DomainError(f"{idx} lies in no region")  # cannot happen on [0,1]^2
    if any(v != vals[0] for v in vals):
        raise ContractError(f"branches disagree at {idx}: {vals}")
    return vals[0]


def mu1(idx) -> Fraction:
    """Large-dilation index (starred regions)."""
    return _mu(idx, True)


def mu2(idx) -> Fraction:
    """Small-dilation index (unstarred regions)."""
    return _mu(idx, False)


def _matrix(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return np.atleast_2d(A)


def _check_invertible(M, what):
    if abs(np.linalg.det(M)) <= 1e-12 * max(1.0, np.linalg.norm(M) ** M.shape[0]):
        raise SingularityError(f"{what} is singular")


def dilation_bound_general(A, idx) -> float:
    """|det A|^{-(1/p - 1/q + 1)} det(I + A^T A)^{1/2} for f -> f(A .) on M^{p,q}."""
    idx = _pair(idx)
    A = _matrix(A)
    _check_invertible(A, "dilation matrix")
    d = A.shape[0]
    e = float(idx.inv_p - idx.inv_q + 1)
    return float(abs(np.linalg.det(A)) ** (-e) * np.linalg.det(np.eye(d) + A.T @ A) ** 0.5)


def _eig_product(eigs, m1, m2) -> float:
    out = 1.0
    for lam in eigs:
        lam = abs(float(lam))
        if lam == 0:
            raise SingularityError("zero eigenvalue")
        out *= max(1.0, lam) ** float(m1) * min(1.0, lam) ** float(m2)
    return out


def dilation_bound_symmetric(eigs, idx, space: str = "modulation") -> float:
    """Product over eigenvalues of max(1,|l|)^mu1 min(1,|l|)^mu2.

    For the Wiener amalgam space the indices are taken at the conjugate pair.
    """
    idx = _pair(idx)
    if space == "wiener":
        idx = idx.conjugate()
    elif space != "modulation":
        raise DomainError("space must be 'modulation' or 'wiener'")
    return _eig_product(list(np.atleast_1d(eigs)), mu1(idx), mu2(idx))


def _blocks(S):
    M = np.asarray(getattr(S, "matrix", S), dtype=float)
    d = M.shape[0] // 2
    return M[:d, :d], M[:d, d:], M[d:, :d], M[d:, d:], d


def _absdet(M) -> float:
    return float(abs(np.linalg.det(M)))


def _require_p_le_q(idx: IndexPair):
    if idx.inv_p < idx.inv_q:
        raise AdmissibilityError(f"requires p <= q, got {idx}")


def alpha(S, idx) -> float:
    """|det B|^{1/q-1/p-3/2} |det (I+B^T B)(B+iA)(B+iD)|^{1/2}."""
    idx = _pair(idx)
    _require_p_le_q(idx)
    A, B, C, D, d = _blocks(S)
    _check_invertible(B, "B block")
    I = np.eye(d)
    e = float(idx.inv_q - idx.inv_p) - 1.5
    cplx = _absdet(I + B.T @ B) * _absdet(B + 1j * A) * _absdet(B + 1j * D)
    return _absdet(B) ** e * cplx ** 0.5


def beta(S) -> float:
    """Constant for the (1, inf) Wiener estimate:
    |det A|^{-3/2} |det B|^{-1} |det (I+A^T A)(B+iA)(A+iC)|^{1/2}."""
    A, B, C, D, d = _blocks(S)
    _check_invertible(A, "A block")
    _check_invertible(B, "B block")
    I = np.eye(d)
    cplx = _absdet(I + A.T @ A) * _absdet(B + 1j * A) * _absdet(A + 1j * C)
    return _absdet(A) ** -1.5 * _absdet(B) ** -1.0 * cplx ** 0.5


def _sym_eigs(M, what):
    if np.max(np.abs(M - M.T)) > 1e-10 * max(1.0, np.max(np.abs(M))):
        raise ContractError(f"{what} must be symmetric")
    return np.linalg.eigvalsh(M)


def alpha_prime(S, idx) -> float:
    """Sharpened alpha for symmetric B with eigenvalues l_j:
    |det(B+iA)(B+iD)|^{1/2} prod max(1,|l|)^{mu1-1/2} min(1,|l|)^{mu2-1/2}."""
    idx = _pair(idx)
    _require_p_le_q(idx)
    A, B, C, D, d = _blocks(S)
    lam = _sym_eigs(B, "B block")
    _check_invertible(B, "B block")
    cplx = _absdet(B + 1j * A) * _absdet(B + 1j * D)
    return cplx ** 0.5 * _eig_product(lam, mu1(idx) - HALF, mu2(idx) - HALF)


def beta_prime(S) -> float:
    """Sharpened beta for symmetric A with eigenvalues n_j:
    |det B|^{-1} |det(B+iA)(A+iC)|^{1/2} prod max(1,|n|)^{-1/2} min(1,|n|)^{-3/2}."""
    A, B, C, D, d = _blocks(S)
    nu = _sym_eigs(A, "A block")
    _check_invertible(A, "A block")
    _check_invertible(B, "B block")
    cplx = _absdet(B + 1j * A) * _absdet(A + 1j * C)
    return _absdet(B) ** -1.0 * cplx ** 0.5 * _eig_product(nu, Fraction(-1, 2), Fraction(-3, 2))


def _check_t(kind, t, eps_t):
    if kind == "harmonic":
        if abs(math.sin(t)) < eps_t:
            raise SingularityError(f"t={t} is within {eps_t} of the excluded set k*pi")
    elif kind in ("repulsive", "free"):
        if abs(t) < eps_t:
            raise SingularityError(f"t={t} is within {eps_t} of the excluded set {{0}}")
    else:
        raise DomainError(f"unknown kind {kind!r}")


def dispersive_bound(kind: str, t: float, r, d: int = 1, B=None, eps_t: float = 1e-3) -> float:
    """Predicted W(FL^r', L^r) <- W(FL^r, L^r') fixed-time profile.

    harmonic:  |sin t|^{-2d(1/2-1/r)}
    repulsive: ((1+|sinh t|)/sinh^2 t)^{d(1/2-1/r)}
    free:      prod_j ((1+t^2 l_j^2)/(t^4 l_j^4))^{(1/2)(1/2-1/r)}  (eigenvalues l_j of B)
    """
    ir = reciprocal(r)
    if ir > HALF:
        raise AdmissibilityError(f"r must be >= 2, got {r}")
    _check_t(kind, t, eps_t)
    e = float(HALF - ir)
    if kind == "harmonic":
        return abs(math.sin(t)) ** (-2 * d * e)
    if kind == "repulsive":
        s = math.sinh(t)
        return ((1 + abs(s)) / s ** 2) ** (d * e)
    B = np.eye(d) if B is None else _matrix(B)
    lam = np.linalg.eigvalsh(B)
    out = 1.0
    for l in lam:
        if l == 0:
            raise SingularityError("B must be invertible")
        out *= ((1 + t * t * l * l) / (t ** 4 * l ** 4)) ** (0.5 * e)
    return out


def classical_bound(kind: str, t: float, d: int = 1, B=None) -> float:
    """Kernel-modulus L^1 -> L^inf constants: |sin t|^{-d/2}, |sinh t|^{-d/2}, |t|^{-d/2}|det B|^{-1/2}."""
    if kind == "harmonic":
        return abs(math.sin(t)) ** (-d / 2)
    if kind == "repulsive":
        return abs(math.sinh(t)) ** (-d / 2)
    if kind == "free":
        B = np.eye(d) if B is None else _matrix(B)
        return abs(t) ** (-d / 2) * _absdet(B) ** -0.5
    raise DomainError(f"unknown kind {kind!r}")


def strichartz_admissible(q, r, d: int, endpoint_allowed: bool = False) -> bool:
    """2/q + d/r = d/2 exactly, with q > 4 and r >= 2 (or the endpoint (4, 2d/(d-1)), d > 1)."""
    iq, ir = reciprocal(q), reciprocal(r)
    if ir > HALF:
        return False
    if 2 * iq + d * ir != Fraction(d, 2):
        return False
    if iq < Fraction(1, 4):
        return True
    if endpoint_allowed and d > 1 and iq == Fraction(1, 4) and ir == Fraction(d - 1, 2 * d):
        return True
    return False


@dataclass
class BoundReport:
    """Predicted vs fitted value; ``kind`` says how they are compared.

    kind = 'equal': |predicted - fitted| <= tol
           'upper': fitted <= predicted + tol   (fitted growth may not exceed the bound)
           'lower': fitted >= predicted - tol
           'relative': |fitted / predicted - 1| <= tol
    """
    name: str
    predicted: float
    fitted: float
    param_range: tuple
    kind: str = "equal"
    tol: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def residual(self) -> float:
        return abs(self.predicted - self.fitted)

    @property
    def passed(self) -> bool:
        if self.kind == "equal":
            return self.residual <= self.tol
        if self.kind == "upper":
            return self.fitted <= self.predicted + self.tol
        if self.kind == "lower":
            return self.fitted >= self.predicted - self.tol
        if self.kind == "relative":
            return self.predicted != 0 and abs(self.fitted / self.predicted - 1) <= self.tol
        raise DomainError(f"unknown comparison {self.kind!r}")
