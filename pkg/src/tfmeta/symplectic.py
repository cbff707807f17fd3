"""Linear algebra for the real symplectic group Sp(d) and its Lie algebra.

Matrices are 2d x 2d real arrays split into contiguous d x d quadrants
(A, B; C, D).  The standard symplectic form is J = (0, I; -I, 0).
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DimensionError

TAU_SYM = 1e-10


def _as_square_even(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2 or M.shape[0] == 0:
        raise DimensionError(f"expected an even side length, got {M.shape[0]}")
    return M


def standard_J(d: int) -> np.ndarray:
    I = np.eye(d)
    Z = np.zeros((d, d))
    return np.block([[Z, I], [-I, Z]])


def blocks(M) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    M = _as_square_even(M)
    d = M.shape[0] // 2
    return M[:d, :d], M[:d, d:], M[d:, :d], M[d:, d:]


def assemble(A, B, C, D) -> np.ndarray:
    A, B, C, D = (np.atleast_2d(np.asarray(X, dtype=float)) for X in (A, B, C, D))
    return np.block([[A, B], [C, D]])


def is_symplectic(M, tol: float = TAU_SYM) -> bool:
    """True iff max |M^T J M - J| <= tol."""
    M = _as_square_even(M)
    J = standard_J(M.shape[0] // 2)
    return bool(np.max(np.abs(M.T @ J @ M - J)) <= tol)


def is_algebra_element(A, tol: float = TAU_SYM) -> bool:
    """True iff max |A^T J + J A| <= tol, i.e. A J is symmetric."""
    A = _as_square_even(A)
    J = standard_J(A.shape[0] // 2)
    return bool(np.max(np.abs(A.T @ J + J @ A)) <= tol)


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    """A verified element of Sp(d).

    Construction checks M^T J M = J and, independently, det M = 1.
    """
    matrix: np.ndarray
    tol: float = TAU_SYM

    def __post_init__(self):
        M = _as_square_even(self.matrix).copy()
        # rounding in M^T J M scales with ||M||^2, so the check is relative
        if not is_symplectic(M, self.tol * max(1.0, np.linalg.norm(M, 2) ** 2)):
            raise ContractError("matrix is not symplectic within tolerance")
        # cancellation in det grows like ||M||^{2d}
        slack = max(1e-9, 1e-13 * np.linalg.norm(M, 2) ** M.shape[0])
        if abs(np.linalg.det(M) - 1.0) > slack:
            raise ContractError("determinant differs from 1")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def from_blocks(cls, A, B, C, D, tol: float = TAU_SYM) -> "SymplecticMatrix":
        return cls(assemble(A, B, C, D), tol)

    @classmethod
    def identity(cls, d: int) -> "SymplecticMatrix":
        return cls(np.eye(2 * d))

    @classmethod
    def J(cls, d: int) -> "SymplecticMatrix":
        return cls(standard_J(d))

    @property
    def d(self) -> int:
        return self.matrix.shape[0] // 2

    @property
    def A(self):
        return self.matrix[: self.d, : self.d]

    @property
    def B(self):
        return self.matrix[: self.d, self.d:]

    @property
    def C(self):
        return self.matrix[self.d:, : self.d]

    @property
    def D(self):
        return self.matrix[self.d:, self.d:]

    def inverse(self) -> "SymplecticMatrix":
        # M^{-1} = (D^T, -B^T; -C^T, A^T)
        return SymplecticMatrix(assemble(self.D.T, -self.B.T, -self.C.T, self.A.T), self.tol)

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        if not isinstance(other, SymplecticMatrix):
            return NotImplemented
        if other.d != self.d:
            raise DimensionError("dimension mismatch in product")
        return SymplecticMatrix(self.matrix @ other.matrix, max(self.tol, other.tol))

    def __repr__(self):
        return f"SymplecticMatrix(d={self.d}, matrix={self.matrix.tolist()!r})"


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """A verified element of the symplectic Lie algebra (A J symmetric)."""
    matrix: np.ndarray
    tol: float = TAU_SYM
    kind: str | None = None  # 'harmonic' | 'repulsive' | 'free' when built by the named constructors

    def __post_init__(self):
        M = _as_square_even(self.matrix).copy()
        if not is_algebra_element(M, self.tol):
            raise ContractError("matrix is not in the symplectic Lie algebra")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def d(self) -> int:
        return self.matrix.shape[0] // 2

    def blocks(self):
        return blocks(self.matrix)


def harmonic_generator(d: int) -> AlgebraElement:
    return AlgebraElement(standard_J(d), kind="harmonic")


def repulsive_generator(d: int) -> AlgebraElement:
    I = np.eye(d)
    Z = np.zeros((d, d))
    return AlgebraElement(np.block([[Z, I], [I, Z]]), kind="repulsive")


def free_generator(B) -> AlgebraElement:
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if np.max(np.abs(B - B.T)) > TAU_SYM:
        raise ContractError("free-particle matrix B must be symmetric")
    Z = np.zeros_like(B)
    return AlgebraElement(np.block([[Z, B], [Z, Z]]), kind="free")


def _expm_taylor(X: np.ndarray, order: int = 18) -> np.ndarray:
    """exp(X) by scaling and squaring around a fixed-order Taylor core."""
    n1 = np.max(np.sum(np.abs(X), axis=0)) if X.size else 0.0
    s = max(0, int(math.ceil(math.log2(n1 / 0.25)))) if n1 > 0.25 else 0
    Y = X / (2.0 ** s)
    E = np.eye(X.shape[0])
    term = np.eye(X.shape[0])
    for k in range(1, order + 1):
        term = term @ Y / k
        E = E + term
    for _ in range(s):
        E = E @ E
    return E


def _closed_form(a: AlgebraElement, t: float) -> np.ndarray | None:
    d = a.d
    I = np.eye(d)
    if a.kind == "harmonic":
        c, s = math.cos(t), math.sin(t)
        return assemble(c * I, s * I, -s * I, c * I)
    if a.kind == "repulsive":
        c, s = math.cosh(t), math.sinh(t)
        return assemble(c * I, s * I, s * I, c * I)
    if a.kind == "free":
        B = a.matrix[:d, d:]
        return assemble(I, t * B, np.zeros((d, d)), I)
    return None


def exp_scaled(a, t: float, closed_form: bool = True, tol: float = TAU_SYM) -> SymplecticMatrix:
    """Return exp(t a) as a SymplecticMatrix.

    ``a`` may be an AlgebraElement or a raw matrix (validated here).  For the
    harmonic, repulsive and free generators a closed form is used unless
    ``closed_form`` is False.
    """
    if not isinstance(a, AlgebraElement):
        a = AlgebraElement(np.asarray(a, dtype=float), tol)
    t = float(t)
    if t == 0.0:
        return SymplecticMatrix(np.eye(2 * a.d), tol)
    M = _closed_form(a, t) if closed_form else None
    if M is None:
        M = _expm_taylor(t * a.matrix)
    return SymplecticMatrix(M, tol)


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """P(x, xi) = 1/2 xi.B xi - xi.A x - 1/2 x.C x."""
    B: np.ndarray
    A: np.ndarray
    C: np.ndarray

    def __post_init__(self):
        for name in ("B", "C"):
            M = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if np.max(np.abs(M - M.T)) > TAU_SYM:
                raise ContractError(f"{name} coefficient must be symmetric")
            object.__setattr__(self, name, M)
        object.__setattr__(self, "A", np.atleast_2d(np.asarray(self.A, dtype=float)))

    def __call__(self, x, xi) -> float:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        return float(0.5 * xi @ self.B @ xi - xi @ self.A @ x - 0.5 * x @ self.C @ x)


def hamiltonian_form(a: AlgebraElement) -> QuadraticForm:
    """Coefficients of the quadratic symbol attached to a = (A, B; C, -A^T)."""
    if not isinstance(a, AlgebraElement):
        a = AlgebraElement(np.asarray(a, dtype=float))
    A, B, C, _ = a.blocks()
    return QuadraticForm(B=B, A=A, C=C)


# -- CSV interchange ---------------------------------------------------------

def write_matrix_csv(M, path=None) -> str:
    """Header ``dim,d`` then 2d rows of comma-separated decimals (row-major)."""
    M = _as_square_even(getattr(M, "matrix", M))
    d = M.shape[0] // 2
    buf = io.StringIO()
    buf.write(f"dim,{d}\n")
    for row in M:
        buf.write(",".join(repr(float(v)) for v in row) + "\n")
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def read_matrix_csv(path_or_text: str) -> np.ndarray:
    if "\n" in path_or_text or path_or_text.startswith("dim,"):
        text = path_or_text
    else:
        with open(path_or_text) as fh:
            text = fh.read()
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    head = lines[0].split(",")
    if head[0].strip() != "dim":
        raise DimensionError("matrix CSV must start with 'dim,d'")
    d = int(head[1])
    rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    M = np.array(rows, dtype=float)
    if M.shape != (2 * d, 2 * d):
        raise DimensionError(f"expected {2 * d}x{2 * d} entries, got {M.shape}")
    return M
