"""Pointwise metric, Christoffel and Riemann evaluation for Walker specs.

Index conventions (used everywhere in the package):

* ``gamma[k, i, j]`` is Gamma^k_{ij}, symmetric in (i, j);
* ``r[l, k, i, j]`` is R^l_{kij} with R(d_i, d_j) d_k = R^l_{kij} d_l and
  R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.

Metric derivatives up to second order are exact: each metric entry is
differentiated symbolically and the resulting trees are compiled once per
spec. Only frame-dependent objects downstream use finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .dsl import Expr, MetricSpec, compile_exprs, compile_exprs_vectorized, diff_expr, is_zero
from .errors import DegenerateScreenError

PD_THRESHOLD = 1e-12


def fd_step(p: np.ndarray) -> float:
    """Default central-difference step 1e-5 * (1 + |p|_inf)."""
    return 1e-5 * (1.0 + float(np.max(np.abs(p))))


@dataclass
class MetricJet:
    """Metric with its exact first (and optionally second) coordinate derivatives."""

    g: np.ndarray          # (d, d)
    dg: np.ndarray         # (d, d, d): dg[m, a, b] = d_m g_ab
    ddg: np.ndarray | None  # (d, d, d, d): ddg[m, k, a, b] = d_m d_k g_ab


class MetricField:
    """Compiled evaluator for one MetricSpec."""

    def __init__(self, spec: MetricSpec):
        self.spec = spec
        n = spec.n
        self.dim = d = n + 2
        # Non-constant entries of the upper triangle, in full (n+2) indexing.
        entries: list[tuple[int, int, Expr]] = []
        for i in range(n):
            for j in range(i, n):
                entries.append((i + 1, j + 1, spec.g[i][j]))
        entries.append((d - 1, d - 1, spec.f))
        self._entries = entries

        values = [e for _, _, e in entries]
        first: list[tuple[int, int, int, Expr]] = []
        second: list[tuple[int, int, int, int, Expr]] = []
        for a, b, e in entries:
            for m in range(d):
                de = diff_expr(e, m)
                if is_zero(de):
                    continue
                first.append((m, a, b, de))
                for k in range(m, d):
                    dde = diff_expr(de, k)
                    if not is_zero(dde):
                        second.append((m, k, a, b, dde))
        self._first = [(m, a, b) for m, a, b, _ in first]
        self._second = [(m, k, a, b) for m, k, a, b, _ in second]
        self._fn1 = compile_exprs(values + [e for *_, e in first])
        self._fn2 = compile_exprs(values + [e for *_, e in first] + [e for *_, e in second])
        self._vfn1 = compile_exprs_vectorized(values + [e for *_, e in first])
        self._n_values = len(values)
        self._n_first = len(first)

    def jet(self, p: Sequence[float], order: int = 1) -> MetricJet:
        d = self.dim
        raw = (self._fn2 if order >= 2 else self._fn1)(p)
        g = np.zeros((d, d))
        g[0, d - 1] = g[d - 1, 0] = 1.0
        for (a, b, _), v in zip(self._entries, raw[: self._n_values]):
            g[a, b] = g[b, a] = v
        dg = np.zeros((d, d, d))
        off = self._n_values
        for (m, a, b), v in zip(self._first, raw[off: off + self._n_first]):
            dg[m, a, b] = dg[m, b, a] = v
        ddg = None
        if order >= 2:
            ddg = np.zeros((d, d, d, d))
            off += self._n_first
            for (m, k, a, b), v in zip(self._second, raw[off:]):
                ddg[m, k, a, b] = ddg[m, k, b, a] = v
                ddg[k, m, a, b] = ddg[k, m, b, a] = v
        return MetricJet(g, dg, ddg)

    def christoffel_batch(self, points: np.ndarray) -> np.ndarray:
        """Gamma^k_ij at each row of ``points``: shape (K, d, d, d)."""
        d = self.dim
        raw = self._vfn1(points)
        k = raw.shape[0]
        g = np.zeros((k, d, d))
        g[:, 0, d - 1] = g[:, d - 1, 0] = 1.0
        for col, (a, b, _) in enumerate(self._entries):
            g[:, a, b] = g[:, b, a] = raw[:, col]
        dg = np.zeros((k, d, d, d))
        for col, (m, a, b) in enumerate(self._first, start=self._n_values):
            dg[:, m, a, b] = dg[:, m, b, a] = raw[:, col]
        screen = g[:, 1:-1, 1:-1]
        try:
            chol = np.linalg.cholesky(screen)
            weak = np.min(np.diagonal(chol, axis1=1, axis2=2)) ** 2 < 1e-6
        except np.linalg.LinAlgError:
            weak = True
        if weak:
            lam = np.linalg.eigvalsh(screen)[:, 0]
            if np.any(lam <= PD_THRESHOLD):
                raise DegenerateScreenError(
                    f"screen metric not positive definite (smallest eigenvalue {lam.min():.3e})")
        ginv = np.zeros((k, d, d))
        ginv[:, 0, 0] = -g[:, d - 1, d - 1]
        ginv[:, 0, d - 1] = ginv[:, d - 1, 0] = 1.0
        ginv[:, 1:-1, 1:-1] = np.linalg.inv(screen)
        first_kind = 0.5 * (dg.transpose(0, 3, 1, 2) + dg.transpose(0, 3, 2, 1) - dg)
        return (ginv @ first_kind.reshape(k, d, d * d)).reshape(k, d, d, d)

    # -- derived quantities -------------------------------------------------

    def check_screen(self, g: np.ndarray) -> None:
        screen = g[1:-1, 1:-1]
        lam = np.linalg.eigvalsh(screen)[0]
        if lam <= PD_THRESHOLD:
            raise DegenerateScreenError(
                f"screen metric not positive definite (smallest eigenvalue {lam:.3e})")

    def inverse(self, g: np.ndarray) -> np.ndarray:
        d = self.dim
        ginv = np.zeros((d, d))
        ginv[0, 0] = -g[d - 1, d - 1]
        ginv[0, d - 1] = ginv[d - 1, 0] = 1.0
        ginv[1:-1, 1:-1] = np.linalg.inv(g[1:-1, 1:-1])
        return ginv

    def christoffel(self, p: Sequence[float]) -> np.ndarray:
        jet = self.jet(p, 1)
        self.check_screen(jet.g)
        return _christoffel(self.inverse(jet.g), jet.dg)

    def christoffel_with_derivative(self, p: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
        """Gamma^k_ij and its exact coordinate derivative dgam[m, k, i, j]."""
        jet = self.jet(p, 2)
        self.check_screen(jet.g)
        ginv = self.inverse(jet.g)
        first_kind = _first_kind(jet.dg)
        gam = np.einsum("kl,lij->kij", ginv, first_kind)
        d_first = 0.5 * (np.einsum("mijl->mlij", jet.ddg)
                         + np.einsum("mjil->mlij", jet.ddg)
                         - np.einsum("mlij->mlij", jet.ddg))
        d_ginv = -np.einsum("ka,mab,bl->mkl", ginv, jet.dg, ginv)
        dgam = (np.einsum("mkl,lij->mkij", d_ginv, first_kind)
                + np.einsum("kl,mlij->mkij", ginv, d_first))
        return gam, dgam

    def riemann(self, p: Sequence[float]) -> np.ndarray:
        gam, dgam = self.christoffel_with_derivative(p)
        return _riemann(gam, dgam)


def _first_kind(dg: np.ndarray) -> np.ndarray:
    # Gamma_{l i j} = 1/2 (d_i g_jl + d_j g_il - d_l g_ij); exactly symmetric in (i, j).
    return 0.5 * (np.einsum("ijl->lij", dg) + np.einsum("jil->lij", dg) - dg)


def _christoffel(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    return np.einsum("kl,lij->kij", ginv, _first_kind(dg))


def _riemann(gam: np.ndarray, dgam: np.ndarray) -> np.ndarray:
    # R^l_{kij} = d_i G^l_{jk} - d_j G^l_{ik} + G^m_{jk} G^l_{im} - G^m_{ik} G^l_{jm}
    r = np.einsum("iljk->lkij", dgam) - np.einsum("jlik->lkij", dgam)
    r += np.einsum("mjk,lim->lkij", gam, gam) - np.einsum("mik,ljm->lkij", gam, gam)
    return r


@lru_cache(maxsize=128)
def metric_field(spec: MetricSpec) -> MetricField:
    """Compiled evaluator for ``spec`` (cached)."""
    return MetricField(spec)


def metric_at(spec: MetricSpec, p: Sequence[float]) -> np.ndarray:
    mf = metric_field(spec)
    g = mf.jet(p, 1).g
    mf.check_screen(g)
    return g


def inverse_metric_at(spec: MetricSpec, p: Sequence[float]) -> np.ndarray:
    mf = metric_field(spec)
    return mf.inverse(metric_at(spec, p))


def christoffel_at(spec: MetricSpec, p: Sequence[float]) -> np.ndarray:
    return metric_field(spec).christoffel(p)


def riemann_at(spec: MetricSpec, p: Sequence[float]) -> np.ndarray:
    return metric_field(spec).riemann(p)


def lower_riemann(spec: MetricSpec, p: Sequence[float]) -> np.ndarray:
    """R_{a k i j} = g_{a l} R^l_{k i j} = g(R(d_i, d_j) d_k, d_a)."""
    r = riemann_at(spec, p)
    return np.einsum("al,lkij->akij", metric_at(spec, p), r)


def covariant_derivative(spec: MetricSpec, p: Sequence[float], direction: Sequence[float],
                         field: Callable[[np.ndarray], np.ndarray],
                         h: float | None = None) -> np.ndarray:
    """nabla_D F at p: central difference of F along D plus Gamma(D, F(p)).

    ``field`` maps a point to the coordinate components of a vector field.
    """
    p = np.asarray(p, dtype=float)
    D = np.asarray(direction, dtype=float)
    if h is None:
        h = fd_step(p)
    deriv = (np.asarray(field(p + h * D)) - np.asarray(field(p - h * D))) / (2.0 * h)
    gam = christoffel_at(spec, p)
    return deriv + np.einsum("kij,i,j->k", gam, D, np.asarray(field(p)))
