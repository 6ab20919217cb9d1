"""Invariant suites with documented residual budgets.

Each check returns a residual; ``Row`` pairs it with its budget. Curvature
residuals are measured relative to max(1, |R|_max) at the point.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curvature import (block_route_residual, decompose_block, frame_curvature,
                        leaf_residual, operator_route, route_agreement)
from .dsl import MetricSpec
from .errors import WalkerError
from .frame import adapted_connection, build_frame, screen_second_form, shape_operator
from .tensor import lower_riemann, metric_at, riemann_at
from .transport import Curve, curve_rng, random_curve, vertex_transports

BUDGETS = {
    "frame_orthonormality": 1e-12,
    "bianchi": 1e-9,
    "pair_symmetry": 1e-8,
    "t_sym_symmetry": 1e-10,
    "completeness": 1e-8,
    "route_agreement": 1e-6,
    "duality": 1e-7,
    "involutivity": 1e-7,
    "leaf_h": 1e-8,
    "leaf_star_a": 1e-8,
    "leaf_curvature": 1e-8,
    "omega_perp_plus_omega_t": 1e-10,
    "rs2": 1e-7,
    "rst": 1e-6,
    "transport_metric": 1e-6,
    "transport_reversal": 1e-7,
    "transport_composition": 1e-7,
}


@dataclass
class Row:
    name: str
    residual: float
    budget: float
    error: str | None = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.residual <= self.budget

    def to_dict(self) -> dict:
        res = float(self.residual) if np.isfinite(self.residual) else None
        return {"name": self.name, "residual": res, "budget": self.budget,
                "pass": self.passed, "error": self.error}


def _canonical(n: int) -> np.ndarray:
    d = n + 2
    C = np.zeros((d, d))
    C[0, -1] = C[-1, 0] = 1.0
    C[1:-1, 1:-1] = np.eye(n)
    return C


def point_residuals(spec: MetricSpec, p: Sequence[float], rng: np.random.Generator,
                    h: float | None = None) -> dict[str, float]:
    """All pointwise invariant residuals at ``p``."""
    p = np.asarray(p, dtype=float)
    n = spec.n
    d = n + 2
    v = d - 1
    out: dict[str, float] = {}
    frame = build_frame(spec, p)
    g = metric_at(spec, p)
    out["frame_orthonormality"] = float(np.max(np.abs(frame.basis.T @ g @ frame.basis
                                                      - _canonical(n))))
    r = riemann_at(spec, p)
    Rf = frame_curvature(spec, p)
    scale = max(1.0, float(np.max(np.abs(Rf))))
    cyc = r + np.einsum("lkij->lijk", r) + np.einsum("lkij->ljki", r)
    out["bianchi"] = float(np.max(np.abs(cyc))) / scale
    low = lower_riemann(spec, p)
    out["pair_symmetry"] = float(np.max(np.abs(low - np.einsum("akij->ijak", low)))) / scale
    blk = decompose_block(spec, p)
    out["t_sym_symmetry"] = float(np.max(np.abs(blk.t_sym - blk.t_sym.T))) / scale
    out["completeness"] = block_route_residual(spec, p, blk) / scale
    op = operator_route(spec, p, h)
    agree = route_agreement(blk, op, Rf)
    out["route_agreement"] = max(v_ for k, v_ in agree.items() if k != "star_rt_screen") / scale
    out["rs2"] = agree["star_rt_screen"]
    out["rst"] = float(np.max(np.abs(op.star_rt - Rf[0, 0]))) / scale

    # duality and involutivity through the finite-difference operator route
    N = frame.nvec
    W = rng.normal(size=d)
    dual = 0.0
    for b in range(n):
        Y = frame.basis[:, b + 1]
        lhs = g @ screen_second_form(spec, p, W, Y, fd=True, h=h) @ N
        rhs = shape_operator(spec, p, W, fd=True, h=h) @ g @ Y
        dual = max(dual, abs(lhs - rhs))
    out["duality"] = dual
    conn = adapted_connection(spec, p)
    Wc = conn.frame_omega()
    s = slice(1, v)
    shape = -Wc[s, s, v]          # shape[a, b] = g(A_N X_a, X_b)
    eta = Wc[s, 0, s]             # eta[a, b] = g(*h(X_a, X_b), N)
    out["involutivity"] = float(np.max(np.abs((shape - shape.T) - (eta - eta.T))))
    out["leaf_h"] = float(np.max(np.abs(Wc[:v, v, :v])))
    out["leaf_star_a"] = float(np.max(np.abs(Wc[:v, s, 0])))
    out["leaf_curvature"] = leaf_residual(Rf) / scale
    out["omega_perp_plus_omega_t"] = float(np.max(np.abs(Wc[:, 0, 0] + Wc[:, v, v])))
    return out


def transport_residuals(spec: MetricSpec, base: Sequence[float], seed: int,
                        half_width: float = 1.0, steps_per_unit: float = 200,
                        n_curves: int = 2) -> dict[str, float]:
    base = np.asarray(base, dtype=float)
    metric = rev = comp = 0.0
    curves = [random_curve(base, curve_rng(seed, 10_000 + i), half_width)
              for i in range(n_curves)]
    batch = []
    for c in curves:
        batch += [c, c.reversed(), Curve(c.points[:2]), Curve(c.points[1:])]
    maps = [m[-1] for m in vertex_transports(spec, batch, steps_per_unit)]
    for i, curve in enumerate(curves):
        tau, back, first, rest = maps[4 * i: 4 * i + 4]
        g0, g1 = metric_at(spec, curve.start), metric_at(spec, curve.end)
        metric = max(metric, float(np.max(np.abs(tau.T @ g1 @ tau - g0))) / max(curve.length, 1.0))
        rev = max(rev, float(np.max(np.abs(back @ tau - np.eye(tau.shape[0])))))
        comp = max(comp, float(np.max(np.abs(rest @ first - tau)))
                   / max(1.0, float(np.max(np.abs(tau)))))
    return {"transport_metric": metric, "transport_reversal": rev,
            "transport_composition": comp}


def random_points(base: np.ndarray, count: int, seed: int,
                  half_width: float = 1.0) -> list[np.ndarray]:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 20_000])))
    return [base + rng.uniform(-half_width, half_width, size=base.size) for _ in range(count)]


def run_suite(spec: MetricSpec, points: Sequence[np.ndarray], seed: int = 0,
              h: float | None = None, transport: bool = True,
              steps_per_unit: float = 200) -> list[Row]:
    """Worst residual per named invariant over ``points``."""
    worst: dict[str, float] = {k: 0.0 for k in BUDGETS}
    errors: dict[str, str] = {}
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 30_000])))
    for p in points:
        try:
            for k, val in point_residuals(spec, p, rng, h).items():
                worst[k] = max(worst[k], val)
        except WalkerError as exc:
            errors["point_evaluation"] = f"{type(exc).__name__}: {exc}"
            break
    if transport and points and not errors:
        try:
            for k, val in transport_residuals(spec, points[0], seed,
                                              steps_per_unit=steps_per_unit).items():
                worst[k] = max(worst[k], val)
        except WalkerError as exc:
            errors["transport"] = f"{type(exc).__name__}: {exc}"
    rows = [Row(k, worst[k], BUDGETS[k]) for k in BUDGETS
            if transport or not k.startswith("transport")]
    for k, msg in errors.items():
        rows.append(Row(k, float("inf"), 0.0, msg))
    return rows
