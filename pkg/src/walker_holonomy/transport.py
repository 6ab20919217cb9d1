"""Parallel transport along piecewise-linear coordinate curves and
Ambrose-Singer sampling of the holonomy algebra.

Transport solves Y' = -Gamma(gamma(t))(gamma'(t), Y) for the full matrix Y
with classical RK4 at a fixed number of steps per unit coordinate length.
All curves of one call are integrated in lockstep so each RK4 stage is a
single batched Christoffel evaluation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .algebra import AlgebraBasis, LorentzBlockElement, lie_closure
from .curvature import frame_curvature
from .dsl import MetricSpec
from .frame import build_frame
from .tensor import metric_field

STEPS_PER_UNIT = 200
SAMPLE_BLOCK_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Curve:
    """Piecewise-linear curve through ``points`` (rows), each segment on [0, 1]."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.shape[0] < 2:
            raise ValueError("a curve needs at least two points")
        if np.any(np.all(np.diff(pts, axis=0) == 0.0, axis=1)):
            raise ValueError("consecutive curve points must be distinct")
        object.__setattr__(self, "points", pts)

    @property
    def start(self) -> np.ndarray:
        return self.points[0]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    @property
    def length(self) -> float:
        return float(np.sum(np.linalg.norm(np.diff(self.points, axis=0), axis=1)))

    def reversed(self) -> "Curve":
        return Curve(self.points[::-1].copy())

    def then(self, other: "Curve") -> "Curve":
        """This curve followed by ``other`` (which must start at our end)."""
        if not np.array_equal(self.end, other.start):
            raise ValueError("curves do not join")
        return Curve(np.vstack([self.points, other.points[1:]]))


@dataclass(frozen=True, eq=False)
class TransportMap:
    """Coordinate matrix of tau(gamma): T_start -> T_end."""

    matrix: np.ndarray
    start: np.ndarray
    end: np.ndarray

    def __call__(self, v: Sequence[float]) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=float)


def _schedule(curve: Curve, steps_per_unit: float):
    starts, vels, dts, marks = [], [], [], []
    for P, Q in zip(curve.points[:-1], curve.points[1:]):
        delta = Q - P
        k = max(1, int(np.ceil(steps_per_unit * np.linalg.norm(delta))))
        t = np.arange(k + 1) / k
        nodes = P + t[:, None] * delta
        starts.append(nodes)
        vels.append(np.repeat(delta[None], k, axis=0))
        dts.append(np.full(k, 1.0 / k))
        marks.append(k)
    return starts, vels, dts, marks


def vertex_transports(spec: MetricSpec, curves: Sequence[Curve],
                      steps_per_unit: float = STEPS_PER_UNIT) -> list[list[np.ndarray]]:
    """For each curve, tau from its first point to each of its vertices.

    Entry ``[c][j]`` maps T_{points[0]} to T_{points[j]}; ``[c][0]`` is I.
    """
    mf = metric_field(spec)
    d = mf.dim
    K = len(curves)
    if K == 0:
        return []
    # Flatten each curve's step list: node positions (start, mid, end), velocity, dt.
    x0s, x1s, vs, dts, vertex_steps = [], [], [], [], []
    for c in curves:
        starts, vels, steps, marks = _schedule(c, steps_per_unit)
        x0s.append(np.vstack([s[:-1] for s in starts]))
        x1s.append(np.vstack([s[1:] for s in starts]))
        vs.append(np.vstack(vels))
        dts.append(np.concatenate(steps))
        vertex_steps.append(np.cumsum(marks))
    total = max(len(t) for t in dts)

    def pad(arrs, fill_last):
        out = []
        for a in arrs:
            extra = total - len(a)
            if extra:
                tail = np.repeat(a[-1:], extra, axis=0) if fill_last else np.zeros((extra,) + a.shape[1:])
                a = np.concatenate([a, tail])
            out.append(a)
        return np.stack(out, axis=1)

    X0 = pad(x0s, True)       # (total, K, d)
    X1 = pad(x1s, True)
    V = pad(vs, False)
    DT = pad(dts, False)      # (total, K)

    Y = np.broadcast_to(np.eye(d), (K, d, d)).copy()
    snapshots: list[list[np.ndarray]] = [[np.eye(d)] for _ in range(K)]
    next_mark = [0] * K

    def gen(gam, v):
        # A[k, j] = Gamma^k_{ij} v^i; right-hand side is -A Y
        return (gam.transpose(0, 1, 3, 2) @ v[:, None, :, None])[..., 0]

    g_start = mf.christoffel_batch(X0[0])
    for step in range(total):
        v, dt = V[step], DT[step][:, None, None]
        g_mid = mf.christoffel_batch(0.5 * (X0[step] + X1[step]))
        g_end = mf.christoffel_batch(X1[step])
        A0, Am, A1 = gen(g_start, v), gen(g_mid, v), gen(g_end, v)
        k1 = -A0 @ Y
        k2 = -Am @ (Y + 0.5 * dt * k1)
        k3 = -Am @ (Y + 0.5 * dt * k2)
        k4 = -A1 @ (Y + dt * k3)
        Y = Y + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        for c in range(K):
            marks = vertex_steps[c]
            while next_mark[c] < len(marks) and marks[next_mark[c]] == step + 1:
                snapshots[c].append(Y[c].copy())
                next_mark[c] += 1
        if step + 1 < total:
            g_start = g_end if np.array_equal(X1[step], X0[step + 1]) \
                else mf.christoffel_batch(X0[step + 1])
    return snapshots


def transport_map(spec: MetricSpec, curve: Curve,
                  steps_per_unit: float = STEPS_PER_UNIT) -> TransportMap:
    tau = vertex_transports(spec, [curve], steps_per_unit)[0][-1]
    return TransportMap(matrix=tau, start=curve.start.copy(), end=curve.end.copy())


def transport_along(spec: MetricSpec, curve: Curve, v: Sequence[float],
                    steps_per_unit: float = STEPS_PER_UNIT) -> np.ndarray:
    return transport_map(spec, curve, steps_per_unit)(v)


# ---------------------------------------------------------------------------
# Ambrose-Singer sampling
# ---------------------------------------------------------------------------

def curve_rng(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for curve ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def random_curve(base: np.ndarray, rng: np.random.Generator,
                 half_width: float = 1.0) -> Curve:
    m = int(rng.integers(2, 6))
    pts = base + rng.uniform(-half_width, half_width, size=(m, base.size))
    return Curve(np.vstack([base, pts]))


@dataclass(eq=False)
class VertexSample:
    """Curvature at ``point`` pulled back to the base frame along a curve prefix.

    ``transport`` maps the base tangent space to T_point (coordinates);
    ``rf`` is R^gamma in the base adapted frame, indexed like frame_curvature.
    """

    curve: int
    vertex: int
    point: np.ndarray
    transport: np.ndarray
    rf: np.ndarray


@dataclass(eq=False)
class HolonomySample:
    base: np.ndarray
    frame_basis: np.ndarray
    vertices: list[VertexSample]
    elements: list[LorentzBlockElement] = field(default_factory=list)
    labels: list[str] = field(default_factory=list)
    curves: list[Curve] = field(default_factory=list)

    def __iter__(self) -> Iterator[LorentzBlockElement]:
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, i):
        return self.elements[i]


def sample_holonomy(spec: MetricSpec, base: Sequence[float], n_curves: int, seed: int = 0,
                    *, half_width: float = 1.0, steps_per_unit: float = STEPS_PER_UNIT,
                    block_tol: float = SAMPLE_BLOCK_TOL) -> HolonomySample:
    """R^gamma(e_A, e_B) on all base-frame pairs, over random curves from ``base``.

    Every vertex of every curve contributes (each prefix is itself a curve),
    and the constant curve contributes the curvature at ``base``.
    """
    if n_curves < 1:
        raise ValueError("n_curves must be at least 1")
    base = np.asarray(base, dtype=float)
    frame = build_frame(spec, base)
    E = frame.basis
    d = E.shape[0]
    curves = [random_curve(base, curve_rng(seed, i), half_width) for i in range(n_curves)]
    taus = vertex_transports(spec, curves, steps_per_unit)

    out = HolonomySample(base=base, frame_basis=E, vertices=[], curves=curves)
    out.vertices.append(VertexSample(-1, 0, base, np.eye(d), frame_curvature(spec, base, E)))
    for c, (curve, maps) in enumerate(zip(curves, taus)):
        for j in range(1, len(maps)):
            T = maps[j] @ E
            y = curve.points[j]
            out.vertices.append(VertexSample(c, j, y, maps[j], frame_curvature(spec, y, T)))
    for vs in out.vertices:
        tag = "base" if vs.curve < 0 else f"curve{vs.curve}:v{vs.vertex}"
        for A in range(d):
            for B in range(A + 1, d):
                out.elements.append(LorentzBlockElement.from_matrix(vs.rf[:, :, A, B], block_tol))
                out.labels.append(f"{tag}:({A},{B})")
    return out


def holonomy_algebra(sample: HolonomySample, tol: float) -> AlgebraBasis:
    n = sample.frame_basis.shape[0] - 2
    return lie_closure(sample.elements, tol, n=n, sources=sample.labels)


__all__ = [
    "Curve", "HolonomySample", "STEPS_PER_UNIT", "TransportMap", "VertexSample",
    "curve_rng", "holonomy_algebra", "lie_closure", "random_curve", "sample_holonomy",
    "transport_along", "transport_map", "vertex_transports",
]
