"""Adapted frame (xi, X_1..X_n, N) and the operators induced by the splitting
T M = T_perp + S + Tr.

In a Walker chart xi = d_0 spans the parallel null line, N = -f/2 d_0 + d_{n+1}
spans the transversal line, and the screen S is spanned by d_1..d_n,
orthonormalised in index order by Gram-Schmidt under g_ij.

All frame-dependent first derivatives are exact: the derivative of the
Gram-Schmidt frame comes from the derivative of the Cholesky factor of
g_ij, fed by the symbolic metric derivatives. The finite-difference
``covariant_derivative`` route stays available through ``fd=True`` and is
what the invariant suites compare against.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dsl import MetricSpec
from .errors import BlockFormError, DegenerateScreenError
from .tensor import PD_THRESHOLD, _christoffel, covariant_derivative, metric_field

PARTS = ("Tperp", "S", "Tr")
SHAPE_TOL = 1e-8


@dataclass(frozen=True)
class AdaptedFrame:
    """Frame at one point. ``basis`` has columns (xi, X_1..X_n, N)."""

    point: np.ndarray
    basis: np.ndarray
    inverse: np.ndarray
    metric: np.ndarray

    @property
    def n(self) -> int:
        return self.basis.shape[0] - 2

    @property
    def xi(self) -> np.ndarray:
        return self.basis[:, 0]

    @property
    def nvec(self) -> np.ndarray:
        return self.basis[:, -1]

    @property
    def screen(self) -> np.ndarray:
        """Screen vectors as rows: screen[a] = X_{a+1}."""
        return self.basis[:, 1:-1].T

    def components(self, w: Sequence[float]) -> np.ndarray:
        """Coordinate vector -> frame components (u, s_1..s_n, v)."""
        return self.inverse @ np.asarray(w, dtype=float)

    def vector(self, c: Sequence[float]) -> np.ndarray:
        """Frame components -> coordinate vector."""
        return self.basis @ np.asarray(c, dtype=float)


def _screen_factor(G: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cholesky factor L (G = L L^T) and the Gram-Schmidt matrix Q = L^{-T}."""
    lam = np.linalg.eigvalsh(G)[0]
    if lam <= PD_THRESHOLD:
        raise DegenerateScreenError(
            f"screen metric not positive definite (smallest eigenvalue {lam:.3e})")
    L = np.linalg.cholesky(G)
    Q = np.linalg.inv(L).T
    return L, Q


def _frame_matrix(f: float, Q: np.ndarray) -> np.ndarray:
    d = Q.shape[0] + 2
    E = np.zeros((d, d))
    E[0, 0] = 1.0
    E[1:-1, 1:-1] = Q
    E[0, -1] = -0.5 * f
    E[-1, -1] = 1.0
    return E


def _frame_inverse(f: float, Q: np.ndarray) -> np.ndarray:
    d = Q.shape[0] + 2
    Einv = np.zeros((d, d))
    Einv[0, 0] = 1.0
    Einv[1:-1, 1:-1] = np.linalg.inv(Q)
    Einv[0, -1] = 0.5 * f
    Einv[-1, -1] = 1.0
    return Einv


def build_frame(spec: MetricSpec, p: Sequence[float]) -> AdaptedFrame:
    p = np.asarray(p, dtype=float)
    g = metric_field(spec).jet(p, 1).g
    f = g[-1, -1]
    _, Q = _screen_factor(g[1:-1, 1:-1])
    return AdaptedFrame(point=p, basis=_frame_matrix(f, Q),
                        inverse=_frame_inverse(f, Q), metric=g)


def project(frame: AdaptedFrame, w: Sequence[float], part: str) -> np.ndarray:
    """Projection of ``w`` onto T_perp, S or Tr along the other two parts."""
    c = frame.components(w)
    if part == "Tperp":
        c[1:] = 0.0
    elif part == "S":
        c[0] = 0.0
        c[-1] = 0.0
    elif part == "Tr":
        c[:-1] = 0.0
    else:
        raise ValueError(f"part must be one of {PARTS}, got {part!r}")
    return frame.vector(c)


# ---------------------------------------------------------------------------
# Frame fields (for finite-difference routes)
# ---------------------------------------------------------------------------

def xi_field(spec: MetricSpec) -> Callable[[np.ndarray], np.ndarray]:
    d = spec.n + 2

    def field(p):
        e = np.zeros(d)
        e[0] = 1.0
        return e

    return field


def n_field(spec: MetricSpec, scale: float = 1.0) -> Callable[[np.ndarray], np.ndarray]:
    mf = metric_field(spec)

    def field(p):
        f = mf.jet(p, 1).g[-1, -1]
        e = np.zeros(mf.dim)
        e[0] = -0.5 * f * scale
        e[-1] = scale
        return e

    return field


def screen_field(spec: MetricSpec, coeffs: Sequence[float]) -> Callable[[np.ndarray], np.ndarray]:
    """Screen field sum_a coeffs[a] X_a with constant coefficients."""
    mf = metric_field(spec)
    c = np.asarray(coeffs, dtype=float)

    def field(p):
        g = mf.jet(p, 1).g
        _, Q = _screen_factor(g[1:-1, 1:-1])
        e = np.zeros(mf.dim)
        e[1:-1] = Q @ c
        return e

    return field


# ---------------------------------------------------------------------------
# Exact connection matrix in the adapted frame
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdaptedConnection:
    """Connection 1-forms of the Levi-Civita connection in the adapted frame.

    ``omega[m]`` is the matrix with column B = frame components of
    nabla_{d_m} e_B, so for a coordinate vector w, ``matrix(w)[C, B]`` is
    the e_C-component of nabla_w e_B.
    """

    frame: AdaptedFrame
    omega: np.ndarray

    def matrix(self, w: Sequence[float]) -> np.ndarray:
        return np.tensordot(np.asarray(w, dtype=float), self.omega, axes=1)

    def shape(self, w) -> np.ndarray:
        """Screen components of A_N w."""
        return -self.matrix(w)[1:-1, -1]

    def hstar(self, w) -> np.ndarray:
        """eta[b] with *h(w, X_b) = eta[b] xi."""
        return self.matrix(w)[0, 1:-1]

    def nstar(self, w) -> np.ndarray:
        """theta[c, b] with *nabla_w X_b = sum_c theta[c, b] X_c."""
        return self.matrix(w)[1:-1, 1:-1]

    def omega_t(self, w) -> float:
        return float(self.matrix(w)[-1, -1])

    def omega_perp(self, w) -> float:
        return float(self.matrix(w)[0, 0])

    def frame_omega(self) -> np.ndarray:
        """W[A, C, B]: e_C-component of nabla_{e_A} e_B."""
        return np.einsum("mA,mCB->ACB", self.frame.basis, self.omega)


def adapted_connection(spec: MetricSpec, p: Sequence[float]) -> AdaptedConnection:
    p = np.asarray(p, dtype=float)
    mf = metric_field(spec)
    jet = mf.jet(p, 1)
    d = mf.dim
    g, dg = jet.g, jet.dg
    f = g[-1, -1]
    L, Q = _screen_factor(g[1:-1, 1:-1])
    E = _frame_matrix(f, Q)
    Einv = _frame_inverse(f, Q)
    gam = _christoffel(mf.inverse(g), dg)

    Linv = np.linalg.inv(L)
    omega = np.empty((d, d, d))
    for m in range(d):
        dE = np.zeros((d, d))
        dG = dg[m, 1:-1, 1:-1]
        if np.any(dG):
            M = Linv @ dG @ Linv.T
            phi = np.tril(M, -1) + 0.5 * np.diag(np.diag(M))
            dL = L @ phi
            dE[1:-1, 1:-1] = -Q @ dL.T @ Q
        dE[0, -1] = -0.5 * dg[m, -1, -1]
        omega[m] = Einv @ (dE + gam[:, m, :] @ E)
    frame = AdaptedFrame(point=p, basis=E, inverse=Einv, metric=g)
    return AdaptedConnection(frame=frame, omega=omega)


# ---------------------------------------------------------------------------
# Public operators
# ---------------------------------------------------------------------------

def _fd_nabla(spec, p, w, field, h):
    return covariant_derivative(spec, p, w, field, h=h)


def shape_operator(spec: MetricSpec, p: Sequence[float], w: Sequence[float],
                   v_scale: float = 1.0, *, fd: bool = False,
                   h: float | None = None) -> np.ndarray:
    """A_V w for V = v_scale * N, as a coordinate vector in S."""
    p = np.asarray(p, dtype=float)
    if fd:
        frame = build_frame(spec, p)
        nabla = _fd_nabla(spec, p, w, n_field(spec, v_scale), h)
        c = frame.components(nabla)
    else:
        conn = adapted_connection(spec, p)
        frame = conn.frame
        c = v_scale * conn.matrix(w)[:, -1]
    scale = max(1.0, float(np.max(np.abs(c))))
    if abs(c[0]) > SHAPE_TOL * scale:
        raise BlockFormError(
            f"A_V w has a T_perp component {c[0]:.3e}; convention or Walker-form violation")
    a = -c
    a[0] = 0.0
    a[-1] = 0.0
    return frame.vector(a)


def screen_second_form(spec: MetricSpec, p: Sequence[float], w: Sequence[float],
                       y: Sequence[float], *, fd: bool = False,
                       h: float | None = None) -> np.ndarray:
    """*h(w, y) for y in S (extended with constant Gram-Schmidt coefficients)."""
    p = np.asarray(p, dtype=float)
    frame = build_frame(spec, p)
    coeffs = frame.components(y)[1:-1]
    if fd:
        nabla = _fd_nabla(spec, p, w, screen_field(spec, coeffs), h)
        return project(frame, nabla, "Tperp")
    eta = adapted_connection(spec, p).hstar(w)
    return float(eta @ coeffs) * frame.xi


def connection_scalars(spec: MetricSpec, p: Sequence[float], w: Sequence[float], *,
                       fd: bool = False, h: float | None = None) -> tuple[float, float]:
    """(omega_t, omega_perp): nabla^t_w N = omega_t N, *nabla^t_w xi = omega_perp xi."""
    p = np.asarray(p, dtype=float)
    if fd:
        frame = build_frame(spec, p)
        wt = frame.components(_fd_nabla(spec, p, w, n_field(spec), h))[-1]
        wp = frame.components(_fd_nabla(spec, p, w, xi_field(spec), h))[0]
        return float(wt), float(wp)
    conn = adapted_connection(spec, p)
    return conn.omega_t(w), conn.omega_perp(w)


def star_nabla(spec: MetricSpec, p: Sequence[float], w: Sequence[float], y: int, *,
               fd: bool = False, h: float | None = None) -> np.ndarray:
    """*nabla_w X_y (screen index y is 0-based) as a coordinate vector in S."""
    p = np.asarray(p, dtype=float)
    frame = build_frame(spec, p)
    if fd:
        e = np.zeros(spec.n)
        e[y] = 1.0
        nabla = _fd_nabla(spec, p, w, screen_field(spec, e), h)
        return project(frame, nabla, "S")
    theta = adapted_connection(spec, p).nstar(w)
    c = np.zeros(spec.n + 2)
    c[1:-1] = theta[:, y]
    return frame.vector(c)
