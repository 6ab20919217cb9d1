"""Decide the type (1-4) of a sampled holonomy algebra in so(1, n+1)_{RU}.

Type table, elements written as (a, X, A):

1. all of R (+) (R^n |x h): contains (1, 0, 0);
2. (0, X, A), X in R^n, A in h;
3. (phi(A), X, A) with phi: h -> R, phi|h' = 0, phi != 0;
4. (0, (X1, psi(A)), A), X1 in R^n1, A in h < so(n1), psi: h -> R^n2 onto,
   psi|h' = 0.

``phi`` is stored as a matrix F in h with phi(A) = <F, A> (Frobenius);
``psi`` as n2 such matrices, in the orthonormal basis ``psi_directions``
of the complement of R^n1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import AlgebraBasis, LorentzBlockElement, block_form_residual, span_basis

DEFAULT_TOL = 1e-5


def _skew_vec(A: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(A.shape[0], 1)
    return np.sqrt(2.0) * A[iu]


def _skew_mat(v: np.ndarray, n: int) -> np.ndarray:
    A = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    A[iu] = np.asarray(v) / np.sqrt(2.0)
    return A - A.T


def _null_space(M: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal rows spanning {c : M c ~ 0} at relative tolerance."""
    if M.size == 0:
        return np.eye(M.shape[1])
    _, s, vt = np.linalg.svd(M, full_matrices=True)
    scale = max(s[0] if s.size else 0.0, 1.0)
    rank = int(np.sum(s > tol * scale))
    return vt[rank:]


def _rank(M: np.ndarray, tol: float) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > tol * max(s[0], 1.0)))


@dataclass
class HolonomyReport:
    type: int | str
    reason: str
    n: int
    algebra_dim: int
    h_basis: list[np.ndarray]
    h_prime_dim: int
    center_dim: int
    weak_irreducibility_flag: bool
    tol: float
    phi: np.ndarray | None = None
    n1: int | None = None
    n2: int | None = None
    psi: list[np.ndarray] | None = None
    psi_directions: np.ndarray | None = None
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def h_dim(self) -> int:
        return len(self.h_basis)

    @property
    def determinate(self) -> bool:
        return self.type != "indeterminate"

    def to_dict(self) -> dict:
        out = {
            "type": self.type,
            "reason": self.reason,
            "algebra_dim": self.algebra_dim,
            "h_dim": self.h_dim,
            "h_basis": [h.tolist() for h in self.h_basis],
            "h_prime_dim": self.h_prime_dim,
            "center_dim": self.center_dim,
            "weak_irreducibility_flag": self.weak_irreducibility_flag,
            "phi": None if self.phi is None else self.phi.tolist(),
            "n1": self.n1,
            "n2": self.n2,
            "psi": None if self.psi is None else [p.tolist() for p in self.psi],
            "psi_directions": (None if self.psi_directions is None
                               else self.psi_directions.tolist()),
            "residuals": {k: float(v) for k, v in sorted(self.residuals.items())},
        }
        return out


def orthogonal_part(A_vecs: np.ndarray, n: int, tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(h, h', z(h)) as orthonormal rows in skew-vector coordinates."""
    h, _ = span_basis(A_vecs, tol) if A_vecs.size else (np.zeros((0, n * (n - 1) // 2)), None)
    mats = [_skew_mat(v, n) for v in h]
    # bracket closure of the projection (already closed for exact input)
    for _ in range(10):
        br = [_skew_vec(mats[i] @ mats[j] - mats[j] @ mats[i])
              for i in range(len(mats)) for j in range(i + 1, len(mats))]
        if not br:
            break
        new, _ = span_basis(np.vstack([h] + br), tol)
        if new.shape[0] == h.shape[0]:
            break
        h = new
        mats = [_skew_mat(v, n) for v in h]
    k = h.shape[0]
    br = [_skew_vec(mats[i] @ mats[j] - mats[j] @ mats[i])
          for i in range(k) for j in range(i + 1, k)]
    hp, _ = span_basis(np.array(br), tol) if br else (np.zeros((0, h.shape[1])), None)
    if k == 0:
        return h, hp, h
    # centre: coefficients c with [sum c_a h_a, h_b] = 0 for all b
    cols = []
    for a in range(k):
        cols.append(np.concatenate([_skew_vec(mats[a] @ mats[b] - mats[b] @ mats[a])
                                    for b in range(k)]))
    null = _null_space(np.array(cols).T, tol)
    z = null @ h if null.size else np.zeros((0, h.shape[1]))
    return h, hp, z


def classify(basis: AlgebraBasis | Sequence[LorentzBlockElement], n: int | None = None,
             tol: float = DEFAULT_TOL) -> HolonomyReport:
    if isinstance(basis, AlgebraBasis):
        elements = list(basis.elements)
        n = basis.n if n is None else n
    else:
        elements = list(basis)
        if n is None:
            if not elements:
                raise ValueError("n is required for an empty basis")
            n = elements[0].n
    for e in elements:
        if e.n != n or block_form_residual(e.matrix()) > 1e-12:
            raise ValueError("basis element is not in so(1,n+1)_RU block form")

    m = len(elements)
    a = np.array([e.a for e in elements]) if m else np.zeros(0)
    X = np.array([e.x_row for e in elements]) if m else np.zeros((0, n))
    Av = np.array([_skew_vec(e.a_block) for e in elements]) if m else np.zeros((0, n * (n - 1) // 2))
    h, hp, z = orthogonal_part(Av, n, tol)
    h_mats = [_skew_mat(v, n) for v in h]
    weak = _rank(X, tol) == n
    res: dict[str, float] = {}

    def report(kind, reason, **kw):
        return HolonomyReport(type=kind, reason=reason, n=n, algebra_dim=m, h_basis=h_mats,
                              h_prime_dim=hp.shape[0], center_dim=z.shape[0],
                              weak_irreducibility_flag=weak, tol=tol, residuals=res, **kw)

    if not weak:
        return report("indeterminate",
                      "translation parts do not span R^n; algebra is not weakly irreducible")

    # coordinates of each element's A-part in the orthonormal h basis
    C = Av @ h.T if h.shape[0] else np.zeros((m, 0))
    res["a_max"] = float(np.max(np.abs(a), initial=0.0))

    if res["a_max"] <= tol:
        # elements whose A-part vanishes
        null = _null_space(C.T, tol) if C.shape[1] else np.eye(m)
        V1, _ = span_basis(null @ X, tol) if null.size else (np.zeros((0, n)), None)
        n1 = V1.shape[0]
        if n1 == n:
            return report(2, "a = 0 and the translations fill R^n", n1=n, n2=0)
        comp = _null_space(V1, tol) if n1 else np.eye(n)
        n2 = comp.shape[0]
        res["h_on_complement"] = float(max(
            (np.max(np.abs(H @ comp.T)) for H in h_mats), default=0.0))
        Y = X @ comp.T
        if C.shape[1] == 0:
            return report("indeterminate", "a = 0, translations miss R^n and h is trivial",
                          n1=n1, n2=n2)
        Psi, *_ = np.linalg.lstsq(C, Y, rcond=None)       # (dim h, n2)
        res["psi_fit"] = float(np.max(np.abs(C @ Psi - Y)))
        psi = [sum(Psi[j, k] * h_mats[j] for j in range(len(h_mats))) for k in range(n2)]
        hp_coords = hp @ h.T if hp.shape[0] else np.zeros((0, h.shape[0]))
        res["psi_on_h_prime"] = float(np.max(np.abs(hp_coords @ Psi), initial=0.0))
        psi_rank = _rank(Psi, tol)
        res["psi_rank_deficit"] = float(n2 - psi_rank)
        ok = (res["h_on_complement"] <= tol and res["psi_fit"] <= tol
              and res["psi_on_h_prime"] <= tol and psi_rank == n2)
        if ok:
            return report(4, f"a = 0, R^{n1} translations, psi onto R^{n2}",
                          n1=n1, n2=n2, psi=psi, psi_directions=comp)
        return report("indeterminate", "a = 0 but no consistent psi coupling found",
                      n1=n1, n2=n2)

    # a-projection nonzero: look for the pure boost (1, 0, 0)
    vecs = np.array([e.vector() for e in elements])
    target = LorentzBlockElement(1.0, np.zeros(n), np.zeros((n, n))).vector()
    coef, *_ = np.linalg.lstsq(vecs.T, target, rcond=None)
    res["boost_residual"] = float(np.max(np.abs(vecs.T @ coef - target)))
    if res["boost_residual"] <= tol:
        return report(1, "contains the pure boost (1, 0, 0)")
    if C.shape[1] == 0:
        return report("indeterminate", "a != 0 with trivial h but no pure boost")
    Phi, *_ = np.linalg.lstsq(C, a, rcond=None)
    res["phi_fit"] = float(np.max(np.abs(C @ Phi - a)))
    hp_coords = hp @ h.T if hp.shape[0] else np.zeros((0, h.shape[0]))
    res["phi_on_h_prime"] = float(np.max(np.abs(hp_coords @ Phi), initial=0.0))
    phi = sum(Phi[j] * h_mats[j] for j in range(len(h_mats)))
    if res["phi_fit"] <= tol and res["phi_on_h_prime"] <= tol:
        return report(3, "boost tied to h by phi", phi=phi)
    return report("indeterminate", "a != 0 but neither a pure boost nor a consistent phi")
