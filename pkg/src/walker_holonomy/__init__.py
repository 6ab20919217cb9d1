"""Holonomy of Lorentzian Walker metrics via the lightlike-foliation splitting.

Pipeline: parse a metric spec, evaluate curvature in the adapted frame
(xi, screen, N), split it into components, sample the holonomy algebra by
parallel transport and classify it into types 1-4.
"""

__version__ = "0.1.0"

from .algebra import AlgebraBasis, LorentzBlockElement, lie_closure  # noqa: E402
from .classify import HolonomyReport, classify  # noqa: E402
from .curvature import (CurvatureComponents, curvature_endomorphism,  # noqa: E402
                        decompose_block, operator_route, reconstruct, star_rt_at)
from .dsl import MetricSpec, parse_expr, parse_metric_spec  # noqa: E402
from .errors import (BlockFormError, ClosureError, DegenerateScreenError,  # noqa: E402
                     DomainError, ParseError, SpecError, WalkerError)
from .frame import (build_frame, connection_scalars, project,  # noqa: E402
                    screen_second_form, shape_operator, star_nabla)
from .propositions import check_prop1, check_prop2, check_prop3  # noqa: E402
from .tensor import christoffel_at, metric_at, riemann_at  # noqa: E402
from .transport import Curve, sample_holonomy, transport_along  # noqa: E402

__all__ = [
    "AlgebraBasis", "BlockFormError", "ClosureError", "Curve", "CurvatureComponents",
    "DegenerateScreenError", "DomainError", "HolonomyReport", "LorentzBlockElement",
    "MetricSpec", "ParseError", "SpecError", "WalkerError", "build_frame",
    "check_prop1", "check_prop2", "check_prop3", "christoffel_at", "classify",
    "connection_scalars", "curvature_endomorphism", "decompose_block", "lie_closure",
    "metric_at", "operator_route", "parse_expr", "parse_metric_spec", "project",
    "reconstruct", "riemann_at", "sample_holonomy", "screen_second_form",
    "shape_operator", "star_nabla", "star_rt_at", "transport_along",
]
