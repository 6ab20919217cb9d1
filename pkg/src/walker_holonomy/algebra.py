"""The Lie algebra so(1, n+1)_{RU} of matrices

    [[a,  X,  0  ],
     [0,  A, -X^T],
     [0,  0, -a  ]]

in the basis (U, X_1..X_n, V), plus numerical span and bracket closure.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import BlockFormError, ClosureError


@dataclass(frozen=True, eq=False)
class LorentzBlockElement:
    a: float
    x_row: np.ndarray
    a_block: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "x_row", np.asarray(self.x_row, dtype=float))
        object.__setattr__(self, "a_block", np.asarray(self.a_block, dtype=float))

    @property
    def n(self) -> int:
        return self.x_row.size

    @classmethod
    def zero(cls, n: int) -> "LorentzBlockElement":
        return cls(0.0, np.zeros(n), np.zeros((n, n)))

    @classmethod
    def from_matrix(cls, M: np.ndarray, tol: float = 1e-8) -> "LorentzBlockElement":
        """Read (a, X, A) off an (n+2)x(n+2) matrix, checking the block shape.

        Violations larger than ``tol * max(1, |M|_max)`` raise BlockFormError.
        """
        M = np.asarray(M, dtype=float)
        a = M[0, 0]
        x = M[0, 1:-1]
        A = M[1:-1, 1:-1]
        err = block_form_residual(M)
        scale = max(1.0, float(np.max(np.abs(M))))
        if err > tol * scale:
            raise BlockFormError(
                f"matrix is not in so(1,n+1)_RU block form (residual {err:.3e})")
        return cls(a, x.copy(), 0.5 * (A - A.T))

    def matrix(self) -> np.ndarray:
        n = self.n
        M = np.zeros((n + 2, n + 2))
        M[0, 0] = self.a
        M[0, 1:-1] = self.x_row
        M[1:-1, 1:-1] = self.a_block
        M[1:-1, -1] = -self.x_row
        M[-1, -1] = -self.a
        return M

    def vector(self) -> np.ndarray:
        """Coordinates whose Euclidean norm equals the Frobenius norm of matrix()."""
        iu = np.triu_indices(self.n, 1)
        return np.sqrt(2.0) * np.concatenate(([self.a], self.x_row, self.a_block[iu]))

    @classmethod
    def from_vector(cls, v: Sequence[float], n: int) -> "LorentzBlockElement":
        v = np.asarray(v, dtype=float) / np.sqrt(2.0)
        A = np.zeros((n, n))
        iu = np.triu_indices(n, 1)
        A[iu] = v[1 + n:]
        return cls(v[0], v[1:1 + n].copy(), A - A.T)

    def bracket(self, other: "LorentzBlockElement") -> "LorentzBlockElement":
        # [M1, M2] = (0, a1 X2 + X1 A2 - a2 X1 - X2 A1, [A1, A2])
        x = (self.a * other.x_row + self.x_row @ other.a_block
             - other.a * self.x_row - other.x_row @ self.a_block)
        A = self.a_block @ other.a_block - other.a_block @ self.a_block
        return LorentzBlockElement(0.0, x, A)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vector()))

    def __add__(self, other):
        return LorentzBlockElement(self.a + other.a, self.x_row + other.x_row,
                                   self.a_block + other.a_block)

    def __sub__(self, other):
        return LorentzBlockElement(self.a - other.a, self.x_row - other.x_row,
                                   self.a_block - other.a_block)

    def __mul__(self, s: float):
        return LorentzBlockElement(s * self.a, s * self.x_row, s * self.a_block)

    __rmul__ = __mul__

    def __repr__(self):
        return (f"LorentzBlockElement(a={self.a:.6g}, x_row={np.round(self.x_row, 6).tolist()}, "
                f"a_block={np.round(self.a_block, 6).tolist()})")


def block_form_residual(M: np.ndarray) -> float:
    M = np.asarray(M, dtype=float)
    parts = [
        M[1:, 0],
        M[-1, :-1],
        [M[0, -1]],
        M[1:-1, -1] + M[0, 1:-1],
        [M[-1, -1] + M[0, 0]],
        (M[1:-1, 1:-1] + M[1:-1, 1:-1].T).ravel(),
    ]
    return float(max(np.max(np.abs(np.asarray(p, dtype=float)), initial=0.0) for p in parts))


def algebra_dim(n: int) -> int:
    return 1 + n + n * (n - 1) // 2


@dataclass
class AlgebraBasis:
    """Orthonormal (Frobenius) basis of a subalgebra of so(1, n+1)_{RU}.

    ``sources`` labels the generating elements (curve index and frame pair);
    ``dim_history`` records the span dimension after each bracket round.
    """

    n: int
    elements: list[LorentzBlockElement]
    dim_history: list[int] = field(default_factory=list)
    sources: list[str] = field(default_factory=list)
    singular_values: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.elements)

    def vectors(self) -> np.ndarray:
        k = algebra_dim(self.n)
        if not self.elements:
            return np.zeros((0, k))
        return np.array([e.vector() for e in self.elements])


def span_basis(vectors: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal rows spanning ``vectors`` at relative tolerance ``tol``."""
    if vectors.size == 0:
        return np.zeros((0, vectors.shape[1] if vectors.ndim == 2 else 0)), np.zeros(0)
    _, s, vt = np.linalg.svd(vectors, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((0, vectors.shape[1])), s
    rank = int(np.sum(s > tol * s[0]))
    return vt[:rank], s


def lie_closure(elements: Iterable[LorentzBlockElement], tol: float = 1e-8, *,
                n: int | None = None, sources: Sequence[str] | None = None,
                max_rounds: int = 10) -> AlgebraBasis:
    """Smallest bracket-closed subspace containing ``elements``.

    Rank decisions keep singular values above ``tol`` times the largest.
    Raises ClosureError if the span is still growing after ``max_rounds``.
    """
    elements = list(elements)
    if n is None:
        if not elements:
            raise ValueError("n is required when elements is empty")
        n = elements[0].n
    k = algebra_dim(n)
    vecs = np.array([e.vector() for e in elements]) if elements else np.zeros((0, k))
    basis, s = span_basis(vecs, tol)
    history = [basis.shape[0]]
    rounds = 0
    while 0 < basis.shape[0] < k:
        if rounds >= max_rounds:
            raise ClosureError(
                f"bracket closure still growing after {max_rounds} rounds "
                f"(dimensions {history}); tolerance {tol:g} may be too tight")
        rounds += 1
        elems = [LorentzBlockElement.from_vector(v, n) for v in basis]
        brackets = [elems[i].bracket(elems[j]).vector()
                    for i in range(len(elems)) for j in range(i + 1, len(elems))]
        if not brackets:
            break
        new, _ = span_basis(np.vstack([basis, np.array(brackets)]), tol)
        history.append(new.shape[0])
        if new.shape[0] == basis.shape[0]:
            basis = new
            break
        basis = new
    return AlgebraBasis(
        n=n,
        elements=[LorentzBlockElement.from_vector(v, n) for v in basis],
        dim_history=history,
        sources=list(sources or []),
        singular_values=s,
    )


def so_basis(n: int) -> list[np.ndarray]:
    """Standard basis E_ij - E_ji (i < j) of so(n)."""
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            B = np.zeros((n, n))
            B[i, j], B[j, i] = -1.0, 1.0
            out.append(B)
    return out


def skew_coords(A: np.ndarray) -> np.ndarray:
    """Coordinates of an antisymmetric matrix in so_basis (lower-triangle entries)."""
    n = A.shape[0]
    # so_basis orders pairs (i<j) row-major; entry (j, i) carries the coefficient.
    return np.array([A[j, i] for i in range(n) for j in range(i + 1, n)])
