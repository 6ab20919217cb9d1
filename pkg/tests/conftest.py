"""Shared fixtures: random Walker specs and an independent sympy oracle."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
import sympy as sp

from walker_holonomy.dsl import MetricSpec, to_string

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def corpus_files() -> list[Path]:
    return sorted(CORPUS.glob("*.spec"))


def random_poly(rng: np.random.Generator, variables: list[int], terms: int = 5,
                max_deg: int = 3) -> str:
    parts = []
    for _ in range(terms):
        c = int(rng.integers(-3, 4)) or 1
        deg = int(rng.integers(1, max_deg + 1))
        idx = rng.choice(variables, size=deg)
        parts.append(f"{c}*" + "*".join(f"x{i}" for i in idx))
    return " + ".join(parts)


def pp_wave_spec(rng: np.random.Generator, n: int) -> MetricSpec:
    """Identity screen, x0-free polynomial profile."""
    f = random_poly(rng, list(range(1, n + 2)), terms=6)
    return MetricSpec.from_strings(n, f)


def walker_spec(rng: np.random.Generator, n: int, x0_terms: bool = True) -> MetricSpec:
    """Random Walker metric with a nontrivial, safely positive screen block."""
    screen = list(range(1, n + 2))
    f = random_poly(rng, screen, terms=5)
    if x0_terms:
        f += " + " + random_poly(rng, [0] + screen, terms=2, max_deg=2)
    g = {}
    for i in range(1, n + 1):
        g[(i, i)] = f"{2 + i} + 0.2*sin(x{int(rng.integers(1, n + 2))})"
        for j in range(i + 1, n + 1):
            a = int(rng.integers(1, n + 2))
            g[(i, j)] = f"0.1*cos(x{a}) + 0.05*x{int(rng.integers(1, n + 2))}"
    return MetricSpec.from_strings(n, f, g)


def random_point(rng: np.random.Generator, n: int, half_width: float = 1.0) -> np.ndarray:
    return rng.uniform(-half_width, half_width, size=n + 2)


# ---------------------------------------------------------------------------
# sympy oracle
# ---------------------------------------------------------------------------

class SympyMetric:
    """Levi-Civita data of a spec computed entirely in sympy."""

    def __init__(self, spec: MetricSpec):
        d = spec.n + 2
        self.x = sp.symbols(f"x0:{d}")
        ns = {f"x{i}": self.x[i] for i in range(d)}

        def conv(e):
            return sp.sympify(to_string(e).replace("^", "**"), locals=ns)

        G = sp.zeros(d, d)
        G[0, d - 1] = G[d - 1, 0] = 1
        G[d - 1, d - 1] = conv(spec.f)
        for i in range(spec.n):
            for j in range(spec.n):
                G[i + 1, j + 1] = conv(spec.g[i][j])
        self.G = G
        self.d = d
        x = self.x
        # first kind: Gamma_{m i j} = 1/2 (d_i g_jm + d_j g_im - d_m g_ij)
        self.first = [[[sp.Rational(1, 2) * (sp.diff(G[j, m], x[i]) + sp.diff(G[i, m], x[j])
                                             - sp.diff(G[i, j], x[m]))
                        for j in range(d)] for i in range(d)] for m in range(d)]
        self._gfun = sp.lambdify(x, G, "numpy")
        self._ffun = sp.lambdify(x, self.first, "numpy")

    def metric(self, p) -> np.ndarray:
        return np.array(self._gfun(*p), dtype=float)

    def christoffel(self, p) -> np.ndarray:
        """Numeric contraction of the symbolic first-kind symbols with inv(g)."""
        first = np.array(self._ffun(*p), dtype=float)
        return np.einsum("km,mij->kij", np.linalg.inv(self.metric(p)), first)

    def inverse_symbolic(self):
        # Walker block structure: only the screen block needs a symbolic inverse
        d = self.d
        Ginv = sp.zeros(d, d)
        Ginv[0, 0] = -self.G[d - 1, d - 1]
        Ginv[0, d - 1] = Ginv[d - 1, 0] = 1
        Ginv[1:d - 1, 1:d - 1] = self.G[1:d - 1, 1:d - 1].inv()
        return Ginv

    def riemann_fn(self):
        """Callable p -> R[l, k, i, j] with R(d_i, d_j) d_k = R^l_{kij} d_l."""
        d, x = self.d, self.x
        Ginv = self.inverse_symbolic()
        gam = [[[sum(Ginv[k, m] * self.first[m][i][j] for m in range(d))
                 for j in range(d)] for i in range(d)] for k in range(d)]
        R = [[[[sp.diff(gam[l][j][k], x[i]) - sp.diff(gam[l][i][k], x[j])
                + sum(gam[l][i][m] * gam[m][j][k] - gam[l][j][m] * gam[m][i][k]
                      for m in range(d))
                for j in range(d)] for i in range(d)] for k in range(d)] for l in range(d)]
        fn = sp.lambdify(x, R, "numpy")
        return lambda p: np.array(fn(*p), dtype=float)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ppwave2():
    return MetricSpec.from_strings(2, "x1^2 + x2^2")


@pytest.fixture
def flat2():
    return MetricSpec.from_strings(2, "0")
