"""End-to-end analysis: decomposition, holonomy sampling, classification,
curvature criteria and invariant residuals, assembled as a JSON-ready dict.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np

from . import __version__
from .algebra import lie_closure
from .classify import DEFAULT_TOL, classify
from .curvature import decompose_block, operator_route, route_agreement
from .dsl import MetricSpec, to_string
from .propositions import check_prop1, check_prop2, check_prop3, sample_points
from .transport import STEPS_PER_UNIT, sample_holonomy
from .verification import random_points, run_suite

SCHEMA_VERSION = "1.0"


def default_point(n: int) -> np.ndarray:
    """(0, 1, ..., 1, 0): off the symmetric points of typical profiles."""
    return np.concatenate(([0.0], np.ones(n), [0.0]))


@dataclass
class AnalysisConfig:
    points: list[list[float]] = field(default_factory=list)
    samples: int = 8
    seed: int = 0
    tol: float = DEFAULT_TOL
    curves: int = 64
    steps_per_unit: float = STEPS_PER_UNIT
    fd_step: float | None = None
    half_width: float = 1.0


def spec_echo(spec: MetricSpec) -> dict:
    return {
        "n": spec.n,
        "f": to_string(spec.f),
        "g": [[to_string(e) for e in row] for row in spec.g],
        "aliases": {k: int(v) for k, v in spec.aliases},
    }


def _norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float)))


def component_summary(spec: MetricSpec, p: np.ndarray, h: float | None) -> dict:
    blk = decompose_block(spec, p)
    op = operator_route(spec, p, h)
    agree = route_agreement(blk, op)
    return {
        "point": [float(c) for c in p],
        "norms": {
            "R1": _norm(blk.r_h),
            "R2": _norm(blk.p_map),
            "R3": _norm(blk.t_sym),
            "R4": abs(float(blk.lam)),
            "R5": _norm(blk.l_row),
        },
        "route_residual": max(agree.values()),
    }


def decompose_report(spec: MetricSpec, p: Sequence[float], h: float | None = None) -> dict:
    p = np.asarray(p, dtype=float)
    blk = decompose_block(spec, p)
    op = operator_route(spec, p, h)
    agree = route_agreement(blk, op)
    return {
        "schema_version": SCHEMA_VERSION,
        "spec": spec_echo(spec),
        "point": [float(c) for c in p],
        "r_h": blk.r_h.tolist(),
        "p_map": blk.p_map.tolist(),
        "t_sym": blk.t_sym.tolist(),
        "lambda": float(blk.lam),
        "l_row": blk.l_row.tolist(),
        "route_residual": max(agree.values()),
        "route_residuals": {k: float(v) for k, v in sorted(agree.items())},
    }


def analyze(spec: MetricSpec, cfg: AnalysisConfig) -> dict:
    n = spec.n
    points = [np.asarray(p, dtype=float) for p in cfg.points] or [default_point(n)]
    base = points[0]
    h = cfg.fd_step

    components = [component_summary(spec, p, h) for p in points]

    sample = sample_holonomy(spec, base, cfg.curves, cfg.seed, half_width=cfg.half_width,
                             steps_per_unit=cfg.steps_per_unit)
    basis = lie_closure(sample.elements, cfg.tol, n=n, sources=sample.labels)
    hol = classify(basis, n, cfg.tol)

    extra = random_points(base, cfg.samples, cfg.seed, cfg.half_width)
    p1 = check_prop1(spec, points + extra + sample_points(sample)[1:], cfg.tol, h)
    p2 = check_prop2(spec, base, tol=cfg.tol, sample=sample)
    p3 = check_prop3(spec, base, tol=cfg.tol, sample=sample)
    consistency = {
        "prop1_iff_type_2_or_4": (not hol.determinate) or p1.verdict == (hol.type in (2, 4)),
        "prop2_implies_type_3": (not p2.verdict) or hol.type == 3,
        "prop3_implies_type_4": (not p3.verdict) or hol.type == 4,
    }

    rows = run_suite(spec, points, cfg.seed, h, transport=True,
                     steps_per_unit=cfg.steps_per_unit)

    holonomy = hol.to_dict()
    holonomy.update({
        "closure_dims": list(basis.dim_history),
        "generators": len(sample.elements),
        "curves": cfg.curves,
        "confidence_note": (f"spanned dimension {basis.dim} from {len(sample.elements)} "
                            f"sampled curvature elements over {cfg.curves} curves; "
                            "more curves could only enlarge it"),
    })
    return {
        "schema_version": SCHEMA_VERSION,
        "spec": spec_echo(spec),
        "points": [[float(c) for c in p] for p in points],
        "components": components,
        "holonomy": holonomy,
        "propositions": {
            "prop1": p1.to_dict(),
            "prop2": p2.to_dict(),
            "prop3": p3.to_dict(),
            "consistency": consistency,
        },
        "verification": [r.to_dict() for r in rows],
        "provenance": {
            "version": __version__,
            "seed": cfg.seed,
            "tol": cfg.tol,
            "curves": cfg.curves,
            "samples": cfg.samples,
            "steps_per_unit": cfg.steps_per_unit,
            "fd_step": cfg.fd_step,
            "half_width": cfg.half_width,
        },
    }


def dumps(report: dict) -> str:
    """Deterministic JSON text (sorted keys, shortest round-trip floats)."""
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def load_schema() -> dict:
    text = resources.files("walker_holonomy").joinpath("report.schema.json").read_text("utf-8")
    return json.loads(text)


def config_dict(cfg: AnalysisConfig) -> dict:
    return asdict(cfg)
