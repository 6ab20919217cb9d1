"""Curvature criteria for the holonomy types, evaluated pointwise and
along sampled curves (independent of ``classify``).

* ``check_prop1``: type in {2, 4} iff the curvature of the T_perp line
  connection vanishes, i.e. lam = 0, l_row = 0 and the S-part of R(U, V)V
  (operator route) vanishes.
* ``check_prop2``: type 3 iff lam = 0, the line curvature on (V, X) is
  phi applied to the screen curvature, with phi compatible with transport
  and not identically zero.
* ``check_prop3``: type 4 iff the screen splits as S1 + S2 with S2 killed
  by all screen curvature, and the S2-part of the translation row is
  psi applied to the screen curvature, compatibly with transport.

All "for every curve" conditions are Monte-Carlo checks over the sampled
curves; residuals are reported as the certificate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .classify import DEFAULT_TOL, _rank, _skew_mat, _skew_vec, orthogonal_part
from .curvature import decompose_block, operator_route
from .dsl import MetricSpec
from .frame import build_frame
from .transport import HolonomySample, sample_holonomy


@dataclass
class CriterionReport:
    name: str
    verdict: bool
    tol: float
    residuals: dict[str, float] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    samples: int = 0
    data: dict[str, np.ndarray] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "verdict": bool(self.verdict),
            "tol": self.tol,
            "samples": self.samples,
            "residuals": {k: float(v) for k, v in sorted(self.residuals.items())},
            "notes": list(self.notes),
            "data": {k: np.asarray(v).tolist() for k, v in sorted(self.data.items())},
        }


def sample_points(sample: HolonomySample) -> list[np.ndarray]:
    """Base point plus every curve vertex of a holonomy sample."""
    return [vs.point for vs in sample.vertices]


def check_prop1(spec: MetricSpec, points: Sequence[Sequence[float]],
                tol: float = DEFAULT_TOL, h: float | None = None) -> CriterionReport:
    r4 = r5 = rt = r5uv = 0.0
    for p in points:
        blk = decompose_block(spec, p)
        op = operator_route(spec, p, h)
        r4 = max(r4, abs(blk.lam))
        r5 = max(r5, float(np.max(np.abs(blk.l_row))))
        rt = max(rt, float(np.max(np.abs(op.star_rt))))
        r5uv = max(r5uv, float(np.max(np.abs(op.l_r5uv))))
    res = {"R4": r4, "R5": r5, "star_rt": rt, "R5UV": r5uv}
    return CriterionReport("prop1", all(v <= tol for v in res.values()), tol, res,
                           samples=len(points))


def _pulled_elements(sample: HolonomySample):
    """(a, x_row, A) of R^gamma on all base-frame pairs at every vertex."""
    d = sample.frame_basis.shape[0]
    a, x, A = [], [], []
    for vs in sample.vertices:
        for i in range(d):
            for j in range(i + 1, d):
                M = vs.rf[:, :, i, j]
                a.append(M[0, 0])
                x.append(M[0, 1:-1])
                A.append(M[1:-1, 1:-1])
    return np.array(a), np.array(x), np.array(A)


def _fit_functional(A_blocks: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares F (skew vector) with <F, A_k> = rhs_k; returns (F, max residual)."""
    G = np.array([_skew_vec(Ak) for Ak in A_blocks])
    if G.size == 0 or G.shape[1] == 0:
        return np.zeros(G.shape[1] if G.ndim == 2 else 0), float(np.max(np.abs(rhs), initial=0.0))
    F, *_ = np.linalg.lstsq(G, rhs, rcond=None)
    return F, float(np.max(np.abs(G @ F - rhs), initial=0.0))


def check_prop2(spec: MetricSpec, base: Sequence[float], n_curves: int = 64, seed: int = 0,
                tol: float = DEFAULT_TOL, sample: HolonomySample | None = None,
                phi: np.ndarray | None = None) -> CriterionReport:
    """Type-3 criterion. ``phi`` (matrix F with phi(A) = <F, A>) may be passed
    from classify; otherwise it is fitted jointly from all sampled elements."""
    if sample is None:
        sample = sample_holonomy(spec, base, n_curves, seed)
    n = spec.n
    res: dict[str, float] = {}
    notes: list[str] = []

    # condition 1 and the pointwise fit of phi_y at every sampled point
    lam = fit22 = fit21 = witness = 0.0
    for p in sample_points(sample):
        c = decompose_block(spec, p)
        lam = max(lam, abs(c.lam))
        blocks = list(c.p_map)
        rhs = list(c.l_row)
        for i in range(n):
            for j in range(i + 1, n):
                blocks.append(c.r_h[i, j])
                rhs.append(0.0)
        F, _ = _fit_functional(np.array(blocks), np.array(rhs))
        G = np.array([_skew_vec(b) for b in blocks])
        if G.shape[1]:
            fit22 = max(fit22, float(np.max(np.abs(G[:n] @ F - c.l_row))))
            if G.shape[0] > n:
                fit21 = max(fit21, float(np.max(np.abs(G[n:] @ F))))
            witness = max(witness, float(np.max(np.abs(G[:n] @ F))))
        else:
            fit22 = max(fit22, float(np.max(np.abs(c.l_row))))
    res["cond1_lambda"] = lam
    res["cond2_2_fit"] = fit22
    res["cond2_1_screen"] = fit21
    res["cond2_3_witness"] = witness

    # condition 2.4: a = phi_x(A) for every transported curvature element
    a, _, A = _pulled_elements(sample)
    if phi is None:
        F, res["cond2_4_transport"] = _fit_functional(A, a)
        phi = _skew_mat(F, n) if F.size else np.zeros((n, n))
    else:
        G = np.array([_skew_vec(Ak) for Ak in A])
        F = _skew_vec(phi)
        res["cond2_4_transport"] = float(np.max(np.abs(G @ F - a), initial=0.0)) if G.shape[1] \
            else float(np.max(np.abs(a), initial=0.0))
    # phi must vanish on h'
    _, hp, _ = orthogonal_part(np.array([_skew_vec(Ak) for Ak in A]), n, tol)
    res["phi_on_h_prime"] = float(np.max(np.abs(hp @ _skew_vec(phi)), initial=0.0)) \
        if hp.size else 0.0
    if witness <= tol:
        notes.append("no point where phi(*R(V, X)) is nonzero")
    verdict = (lam <= tol and fit22 <= tol and fit21 <= tol and witness > tol
               and res["cond2_4_transport"] <= tol and res["phi_on_h_prime"] <= tol)
    return CriterionReport("prop2", verdict, tol, res, notes, samples=len(sample.vertices),
                           data={"phi": phi})


def check_prop3(spec: MetricSpec, base: Sequence[float], n_curves: int = 64, seed: int = 0,
                tol: float = DEFAULT_TOL, sample: HolonomySample | None = None) -> CriterionReport:
    """Type-4 criterion with S2 = common kernel of all sampled screen curvatures."""
    if sample is None:
        sample = sample_holonomy(spec, base, n_curves, seed)
    n = spec.n
    res: dict[str, float] = {}
    notes: list[str] = []
    a, x, A = _pulled_elements(sample)
    res["a_part"] = float(np.max(np.abs(a), initial=0.0))

    stacked = A.reshape(-1, n)
    _, s, vt = np.linalg.svd(stacked, full_matrices=True)
    scale = max(s[0] if s.size else 0.0, 1.0)
    rank = int(np.sum(s > tol * scale))
    S2 = vt[rank:]
    S1 = vt[:rank]
    n2 = S2.shape[0]
    res["s2_dim"] = float(n2)
    if n2 == 0 or n2 == n:
        notes.append("no proper nontrivial S2: screen curvature "
                     + ("has trivial common kernel" if n2 == 0 else "vanishes identically"))
        return CriterionReport("prop3", False, tol, res, notes, samples=len(sample.vertices))

    # S1 invariance under every sampled screen curvature
    res["s1_invariance"] = float(max(np.max(np.abs(S2 @ Ak @ S1.T)) for Ak in A))

    # psi fit: S2-part of the translation row = psi(A), jointly over all
    # transported elements (covers the base point and the transport identity)
    G = np.array([_skew_vec(Ak) for Ak in A])
    Y = x @ S2.T
    Psi, *_ = np.linalg.lstsq(G, Y, rcond=None)
    res["psi_fit"] = float(np.max(np.abs(G @ Psi - Y)))

    # pointwise version at every vertex in its own frame, with S2(y) the
    # screen projection of the parallel image of S2
    point_fit = 0.0
    E = sample.frame_basis
    for vs in sample.vertices:
        c = decompose_block(spec, vs.point)
        Ey = build_frame(spec, vs.point)
        moved = (Ey.inverse @ vs.transport @ E[:, 1:-1] @ S2.T)[1:-1]
        S2y = np.linalg.qr(moved)[0].T
        Gy = np.array([_skew_vec(b) for b in c.p_map])
        Yy = c.t_sym @ S2y.T
        if Gy.shape[1]:
            Py, *_ = np.linalg.lstsq(Gy, Yy, rcond=None)
            Yy = Gy @ Py - Yy
        point_fit = max(point_fit, float(np.max(np.abs(Yy))))
    res["cond2_2_pointwise"] = point_fit

    h, hp, _ = orthogonal_part(G, n, tol)
    res["psi_on_h_prime"] = float(np.max(np.abs(hp @ Psi), initial=0.0)) if hp.size else 0.0
    psi_on_h = (h @ Psi) if h.size else np.zeros((0, n2))
    res["psi_rank_deficit"] = float(n2 - _rank(psi_on_h, tol))
    verdict = (res["a_part"] <= tol and res["s1_invariance"] <= tol and res["psi_fit"] <= tol
               and point_fit <= tol and res["psi_on_h_prime"] <= tol
               and res["psi_rank_deficit"] == 0)
    return CriterionReport("prop3", verdict, tol, res, notes, samples=len(sample.vertices),
                           data={"psi": Psi.T, "s2_basis": S2})
