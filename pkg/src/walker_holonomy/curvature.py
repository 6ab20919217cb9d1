"""Curvature of a Walker metric split along T M = T_perp + S + Tr.

Frame index convention: 0 = xi (U), 1..n = X_1..X_n, n+1 = N (V).
``M(W1, W2)`` is the matrix of R(W1, W2) in the adapted frame, column B
holding the frame components of R(W1, W2) e_B.

Slot conventions of the stored components (screen indices 0-based):

==========  ===========================================  ==============
component   definition                                   shape
==========  ===========================================  ==============
r_h[i, j]   A-block of M(X_i, X_j)                       (n, n, n, n)
p_map[i]    A-block of M(V, X_i)                         (n, n, n)
t_sym[i]    x_row of M(V, X_i)                           (n, n)
lam         a of M(U, V)                                 scalar
l_row[i]    a of M(V, X_i)                               (n,)
p_star      x_row of M(X_i, X_j); p_star[i, j, k]         (n, n, n)
==========  ===========================================  ==============

``p_star`` is not independent: p_star[i, j, k] = p_map[k][i, j].
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .algebra import LorentzBlockElement
from .dsl import MetricSpec
from .errors import BlockFormError
from .frame import AdaptedConnection, adapted_connection, build_frame
from .tensor import fd_step, riemann_at

BLOCK_TOL = 1e-8


def frame_vector(u: float, s: Sequence[float], v: float) -> np.ndarray:
    """Frame components (u, s_1..s_n, v) of u xi + sum s_a X_a + v N."""
    return np.concatenate(([float(u)], np.asarray(s, dtype=float), [float(v)]))


def frame_curvature(spec: MetricSpec, p: Sequence[float],
                    basis: np.ndarray | None = None) -> np.ndarray:
    """Rf[C, D, A, B]: C-component of R(e_A, e_B) e_D at p.

    ``basis`` (columns) defaults to the adapted frame at p; the transported
    frame is passed here when sampling holonomy.
    """
    p = np.asarray(p, dtype=float)
    if basis is None:
        basis = build_frame(spec, p).basis
    r = riemann_at(spec, p)
    inv = np.linalg.inv(basis)
    return np.einsum("Cl,lkij,kD,iA,jB->CDAB", inv, r, basis, basis, basis, optimize=True)


def curvature_endomorphism(spec: MetricSpec, p: Sequence[float],
                           w1: Sequence[float], w2: Sequence[float],
                           tol: float = BLOCK_TOL) -> LorentzBlockElement:
    """R(W1, W2) as a block element; W1, W2 given in frame components."""
    Rf = frame_curvature(spec, p)
    M = np.einsum("CDAB,A,B->CD", Rf, np.asarray(w1, float), np.asarray(w2, float))
    return LorentzBlockElement.from_matrix(M, tol)


@dataclass
class CurvatureComponents:
    """Independent pieces of the curvature in the adapted frame (see module table)."""

    r_h: np.ndarray
    p_map: np.ndarray
    t_sym: np.ndarray
    lam: float
    l_row: np.ndarray

    @property
    def n(self) -> int:
        return self.l_row.size

    @property
    def p_star(self) -> np.ndarray:
        return np.transpose(self.p_map, (1, 2, 0))

    def to_dict(self) -> dict:
        return {
            "r_h": self.r_h.tolist(),
            "p_map": self.p_map.tolist(),
            "p_star": self.p_star.tolist(),
            "t_sym": self.t_sym.tolist(),
            "lam": float(self.lam),
            "l_row": self.l_row.tolist(),
        }


def decompose_block(spec: MetricSpec, p: Sequence[float],
                    tol: float = BLOCK_TOL) -> CurvatureComponents:
    """Read the components off the frame curvature, checking block form."""
    Rf = frame_curvature(spec, p)
    d = Rf.shape[0]
    for A in range(d):
        for B in range(A + 1, d):
            LorentzBlockElement.from_matrix(Rf[:, :, A, B], tol)
    v = d - 1
    s = slice(1, v)
    r_h = np.transpose(Rf[s, s, s, s], (2, 3, 0, 1)).copy()
    p_map = np.transpose(Rf[s, s, v, s], (2, 0, 1)).copy()
    t_sym = Rf[0, s, v, s].T.copy()
    return CurvatureComponents(r_h=r_h, p_map=p_map, t_sym=t_sym,
                               lam=float(Rf[0, 0, 0, v]), l_row=Rf[0, 0, v, s].copy())


def reconstruct(c: CurvatureComponents, w1: Sequence[float],
                w2: Sequence[float]) -> LorentzBlockElement:
    """R(W1, W2) rebuilt from components; W1, W2 in frame components."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    u1, s1, v1 = w1[0], w1[1:-1], w1[-1]
    u2, s2, v2 = w2[0], w2[1:-1], w2[-1]
    # screen-screen part
    A = np.einsum("i,j,ijab->ab", s1, s2, c.r_h)
    x = np.einsum("i,j,ijk->k", s1, s2, c.p_star)
    a = 0.0
    # V-X part: coefficient of M(V, X_i)
    coef = v1 * s2 - s1 * v2
    A = A + np.einsum("i,iab->ab", coef, c.p_map)
    x = x + coef @ c.t_sym
    a += float(coef @ c.l_row)
    # U-V part: M(U, V) = (lam, -l_row, 0)
    uv = u1 * v2 - v1 * u2
    a += uv * c.lam
    x = x - uv * c.l_row
    return LorentzBlockElement(a, x, A)


def block_route_residual(spec: MetricSpec, p: Sequence[float],
                         c: CurvatureComponents | None = None) -> float:
    """Max deviation of reconstruct() from the frame curvature over all frame pairs."""
    Rf = frame_curvature(spec, p)
    if c is None:
        c = decompose_block(spec, p)
    d = Rf.shape[0]
    eye = np.eye(d)
    err = 0.0
    for A in range(d):
        for B in range(d):
            M = reconstruct(c, eye[A], eye[B]).matrix()
            err = max(err, float(np.max(np.abs(M - Rf[:, :, A, B]))))
    return err


# ---------------------------------------------------------------------------
# Operator route: components from the induced operators and their derivatives
# ---------------------------------------------------------------------------

def _frame_omega(conn: AdaptedConnection) -> np.ndarray:
    return conn.frame_omega()


@dataclass
class ConnectionStencil:
    """Frame connection coefficients W at p and their frame derivatives dW.

    dW[B, A, C, D] = e_B(W[A, C, D]) by central differences along the frame.
    """

    W: np.ndarray
    dW: np.ndarray
    h: float

    @property
    def d(self) -> int:
        return self.W.shape[0]

    def bracket(self, A: int, B: int) -> np.ndarray:
        """Frame components of [e_A, e_B] (torsion-free)."""
        return self.W[A, :, B] - self.W[B, :, A]


def connection_stencil(spec: MetricSpec, p: Sequence[float],
                       h: float | None = None) -> ConnectionStencil:
    p = np.asarray(p, dtype=float)
    if h is None:
        h = fd_step(p)
    conn = adapted_connection(spec, p)
    W = _frame_omega(conn)
    d = W.shape[0]
    dW = np.empty((d,) + W.shape)
    for B in range(d):
        e = conn.frame.basis[:, B]
        plus = _frame_omega(adapted_connection(spec, p + h * e))
        minus = _frame_omega(adapted_connection(spec, p - h * e))
        dW[B] = (plus - minus) / (2.0 * h)
    return ConnectionStencil(W=W, dW=dW, h=h)


@dataclass
class OperatorComponents:
    """Curvature pieces rebuilt from shape operator, *h, *nabla and the scalar forms.

    ``star_r[A, B]`` is the screen curvature *R(e_A, e_B) (n x n), ``star_rt``
    the curvature 2-form of the T_perp connection, and ``l_r5uv`` the row L
    recovered from the S-part of R(U, V)V.
    """

    r_h: np.ndarray
    p_map: np.ndarray
    p_star: np.ndarray
    t_sym: np.ndarray
    lam: float
    l_row: np.ndarray
    l_r5uv: np.ndarray
    star_r: np.ndarray
    star_rt: np.ndarray


def _star_r(st: ConnectionStencil, A: int, B: int) -> np.ndarray:
    W, dW = st.W, st.dW
    s = slice(1, st.d - 1)
    th_A, th_B = W[A, s, s], W[B, s, s]
    out = dW[A, B, s, s] - dW[B, A, s, s] + th_A @ th_B - th_B @ th_A
    return out - np.einsum("E,Edk->dk", st.bracket(A, B), W[:, s, s])


def _star_rt(st: ConnectionStencil, A: int, B: int) -> float:
    W, dW = st.W, st.dW
    return float(dW[A, B, 0, 0] - dW[B, A, 0, 0] - st.bracket(A, B) @ W[:, 0, 0])


def operator_route(spec: MetricSpec, p: Sequence[float],
                   h: float | None = None) -> OperatorComponents:
    st = connection_stencil(spec, p, h)
    W, dW = st.W, st.dW
    d = st.d
    n = d - 2
    v = d - 1
    scr = range(1, v)
    s = slice(1, v)

    star_r = np.empty((d, d, n, n))
    star_rt = np.empty((d, d))
    for A in range(d):
        for B in range(d):
            star_r[A, B] = _star_r(st, A, B)
            star_rt[A, B] = _star_rt(st, A, B)

    r_h = star_r[s, s].copy()
    p_map = star_r[v, s].copy()

    # (*nabla_{X_i} *h)(X_j, X_k) - (i <-> j) - *h(*h(X_i,X_j) - *h(X_j,X_i), X_k)
    def nab_h(i, j, k):
        return (dW[i, j, 0, k] + W[j, 0, k] * W[i, 0, 0]
                - sum(W[i, c, j] * W[c, 0, k] for c in scr)
                - sum(W[i, c, k] * W[j, 0, c] for c in scr))

    p_star = np.empty((n, n, n))
    for i in scr:
        for j in scr:
            for k in scr:
                p_star[i - 1, j - 1, k - 1] = (
                    nab_h(i, j, k) - nab_h(j, i, k)
                    - (W[i, 0, j] - W[j, 0, i]) * W[0, 0, k])

    # U-component of R(X_i, N) X_k; t_sym carries the (V, X) order.
    t_sym = np.empty((n, n))
    for i in scr:
        for k in scr:
            d_hN = (dW[i, v, 0, k] + W[v, 0, k] * W[i, 0, 0] - W[i, v, v] * W[v, 0, k]
                    - sum(W[i, c, k] * W[v, 0, c] for c in scr))
            d_N = (dW[v, i, 0, k] + W[i, 0, k] * W[v, 0, 0]
                   - sum(W[v, c, i] * W[c, 0, k] for c in scr)
                   - sum(W[v, c, k] * W[i, 0, c] for c in scr))
            h_AN = -sum(W[i, c, v] * W[c, 0, k] for c in scr)
            h_hN = W[v, 0, i] * W[0, 0, k]
            t_sym[i - 1, k - 1] = -(d_hN - d_N + h_AN + h_hN)

    lam = star_rt[0, v]
    l_row = star_rt[v, s].copy()

    # S-part of R(U, V)V = (nabla_V A)_V U - (nabla_U A)_V V - A_V A_V U
    l_r5uv = np.empty(n)
    for dd in scr:
        nab_v = (-dW[v, 0, dd, v] - sum(W[0, c, v] * W[v, dd, c] for c in scr)
                 + (W[v, v, v] + W[v, 0, 0]) * W[0, dd, v])
        nab_u = (-dW[0, v, dd, v] - sum(W[v, c, v] * W[0, dd, c] for c in scr)
                 + 2.0 * W[0, v, v] * W[v, dd, v])
        aa = sum(W[0, c, v] * W[c, dd, v] for c in scr)
        l_r5uv[dd - 1] = nab_v - nab_u - aa

    return OperatorComponents(r_h=r_h, p_map=p_map, p_star=p_star, t_sym=t_sym,
                              lam=float(lam), l_row=l_row, l_r5uv=l_r5uv,
                              star_r=star_r, star_rt=star_rt)


def route_agreement(block: CurvatureComponents, op: OperatorComponents,
                    Rf: np.ndarray | None = None) -> dict[str, float]:
    """Max abs difference per component between the two routes.

    With ``Rf`` given, also compares *R(W1, W2) with the A-block of every
    frame pair (``star_r_all``) and checks *R^t vanishes on screen pairs.
    """
    out = {
        "r_h": float(np.max(np.abs(block.r_h - op.r_h))),
        "p_map": float(np.max(np.abs(block.p_map - op.p_map))),
        "p_star": float(np.max(np.abs(block.p_star - op.p_star))),
        "t_sym": float(np.max(np.abs(block.t_sym - op.t_sym))),
        "lam": abs(block.lam - op.lam),
        "l_row": float(np.max(np.abs(block.l_row - op.l_row))),
        "l_r5uv": float(np.max(np.abs(block.l_row - op.l_r5uv))),
        "star_rt_screen": float(np.max(np.abs(op.star_rt[1:-1, 1:-1]), initial=0.0)),
    }
    if Rf is not None:
        s = slice(1, Rf.shape[0] - 1)
        blocks = np.transpose(Rf[s, s], (2, 3, 0, 1))
        out["star_r_all"] = float(np.max(np.abs(blocks - op.star_r)))
    return out


def star_rt_at(spec: MetricSpec, p: Sequence[float], w1: Sequence[float],
               w2: Sequence[float], h: float | None = None) -> float:
    """*R^t(W1, W2) for W1, W2 in frame components."""
    st = connection_stencil(spec, p, h)
    d = st.d
    mu = np.array([[_star_rt(st, A, B) for B in range(d)] for A in range(d)])
    return float(np.asarray(w1, float) @ mu @ np.asarray(w2, float))


def leaf_residual(Rf: np.ndarray) -> float:
    """Largest Tr-component of R(W1, W2)W3 with all three tangent to the leaf."""
    v = Rf.shape[0] - 1
    return float(np.max(np.abs(Rf[v, :v, :v, :v])))


__all__ = [
    "BLOCK_TOL", "BlockFormError", "CurvatureComponents", "ConnectionStencil",
    "OperatorComponents", "block_route_residual", "connection_stencil",
    "curvature_endomorphism", "decompose_block", "frame_curvature", "frame_vector",
    "leaf_residual", "operator_route", "reconstruct", "route_agreement", "star_rt_at",
]
