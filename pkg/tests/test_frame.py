import numpy as np
import pytest

from conftest import random_point, walker_spec
from walker_holonomy.dsl import MetricSpec
from walker_holonomy.errors import DegenerateScreenError
from walker_holonomy.frame import (adapted_connection, build_frame, connection_scalars,
                                   project, screen_field, screen_second_form, shape_operator,
                                   star_nabla)
from walker_holonomy.tensor import covariant_derivative, metric_at

P0 = np.array([0.0, 1.0, 2.0, 0.0])


def _canonical(n):
    C = np.zeros((n + 2, n + 2))
    C[0, -1] = C[-1, 0] = 1
    C[1:-1, 1:-1] = np.eye(n)
    return C


def test_pp_wave_frame(ppwave2):
    fr = build_frame(ppwave2, P0)
    np.testing.assert_array_equal(fr.nvec, [-2.5, 0, 0, 1])
    np.testing.assert_array_equal(fr.xi, [1, 0, 0, 0])
    np.testing.assert_array_equal(fr.screen, np.eye(4)[1:3])


def test_flat_and_scaled_screen(flat2):
    np.testing.assert_array_equal(build_frame(flat2, [1, 2, 3, 4]).nvec, [0, 0, 0, 1])
    spec = MetricSpec.from_strings(2, "0", {(1, 1): "4"})
    np.testing.assert_allclose(build_frame(spec, P0).screen[0], [0, 0.5, 0, 0])


def test_frame_invariants_random(rng):
    for n in (2, 3, 4):
        spec = walker_spec(rng, n)
        for _ in range(5):
            p = random_point(rng, n)
            fr = build_frame(spec, p)
            g = metric_at(spec, p)
            assert np.max(np.abs(fr.basis.T @ g @ fr.basis - _canonical(n))) <= 1e-12
            assert np.max(np.abs(fr.inverse @ fr.basis - np.eye(n + 2))) <= 1e-12
            w = rng.normal(size=n + 2)
            np.testing.assert_allclose(fr.vector(fr.components(w)), w, rtol=1e-12, atol=1e-12)


def test_gram_schmidt_is_index_ordered(rng):
    spec = walker_spec(rng, 3)
    fr = build_frame(spec, random_point(rng, 3))
    S = fr.screen[:, 1:-1]
    # X_k lies in span(d_1 .. d_k)
    assert not np.any(np.triu(S, 1))
    assert np.all(np.diag(S) > 0)


def test_projection_examples(ppwave2):
    fr = build_frame(ppwave2, P0)
    assert not np.any(project(fr, fr.xi, "S"))
    np.testing.assert_allclose(project(fr, fr.nvec, "Tr"), fr.nvec)
    np.testing.assert_allclose(project(fr, [0, 0, 0, 1], "Tperp"), [2.5, 0, 0, 0])
    with pytest.raises(ValueError):
        project(fr, fr.xi, "T")


def test_projections_sum_to_identity(rng):
    spec = walker_spec(rng, 3)
    fr = build_frame(spec, random_point(rng, 3))
    w = rng.normal(size=5)
    total = sum(project(fr, w, part) for part in ("Tperp", "S", "Tr"))
    np.testing.assert_allclose(total, w, atol=1e-12)


@pytest.mark.parametrize("fd", [False, True])
def test_pp_wave_operators(ppwave2, fd):
    p = P0
    fr = build_frame(ppwave2, p)
    d1, d2 = np.eye(4)[1], np.eye(4)[2]
    N = fr.nvec
    tol = 1e-8 if fd else 1e-14
    assert np.allclose(shape_operator(ppwave2, p, d1, fd=fd), 0, atol=tol)
    np.testing.assert_allclose(shape_operator(ppwave2, p, N, fd=fd), [0, 1, 2, 0], atol=tol)
    assert np.allclose(screen_second_form(ppwave2, p, d1, d2, fd=fd), 0, atol=tol)
    np.testing.assert_allclose(screen_second_form(ppwave2, p, N, d1, fd=fd), [1, 0, 0, 0],
                               atol=tol)
    for w in (d1, d2, N, fr.xi):
        wt, wp = connection_scalars(ppwave2, p, w, fd=fd)
        assert abs(wt) <= tol and abs(wp) <= tol
        for y in range(2):
            assert np.allclose(star_nabla(ppwave2, p, w, y, fd=fd), 0, atol=tol)


def test_flat_operators_vanish(flat2, rng):
    p = random_point(rng, 2)
    w = rng.normal(size=4)
    assert not np.any(shape_operator(flat2, p, w))
    assert not np.any(screen_second_form(flat2, p, w, [0, 1, 0, 0]))
    assert connection_scalars(flat2, p, w) == (0.0, 0.0)
    assert not np.any(star_nabla(flat2, p, w, 1))


def test_exact_and_fd_routes_agree(rng):
    for n in (2, 3):
        spec = walker_spec(rng, n)
        p = random_point(rng, n)
        fr = build_frame(spec, p)
        w = rng.normal(size=n + 2)
        y = fr.screen[n - 1]
        np.testing.assert_allclose(shape_operator(spec, p, w), shape_operator(spec, p, w, fd=True),
                                   atol=1e-8)
        np.testing.assert_allclose(screen_second_form(spec, p, w, y),
                                   screen_second_form(spec, p, w, y, fd=True), atol=1e-8)
        np.testing.assert_allclose(connection_scalars(spec, p, w),
                                   connection_scalars(spec, p, w, fd=True), atol=1e-8)
        np.testing.assert_allclose(star_nabla(spec, p, w, 0), star_nabla(spec, p, w, 0, fd=True),
                                   atol=1e-8)


def test_shape_operator_scales_linearly(rng):
    spec = walker_spec(rng, 2)
    p = random_point(rng, 2)
    w = rng.normal(size=4)
    np.testing.assert_allclose(shape_operator(spec, p, w, 3.0), 3 * shape_operator(spec, p, w),
                               rtol=1e-12, atol=1e-14)


def test_sweep_identities(rng):
    """Duality, involutivity, leaf identities and omega_perp = -omega_t."""
    for _ in range(5):
        n = int(rng.integers(2, 4))
        spec = walker_spec(rng, n)
        for _ in range(4):
            p = random_point(rng, n)
            fr = build_frame(spec, p)
            g = metric_at(spec, p)
            N = fr.nvec
            W = rng.normal(size=n + 2)
            for b in range(n):
                Y = fr.screen[b]
                lhs = g @ screen_second_form(spec, p, W, Y, fd=True) @ N
                rhs = shape_operator(spec, p, W, fd=True) @ g @ Y
                assert abs(lhs - rhs) <= 1e-7
            X = fr.screen.T
            AX = np.array([shape_operator(spec, p, X[:, a]) for a in range(n)]).T
            H = np.array([[g @ screen_second_form(spec, p, X[:, a], X[:, b]) @ N
                           for b in range(n)] for a in range(n)])
            shape_pair = X.T @ g @ AX        # [b, a] = g(X_b, A_N X_a)
            assert np.max(np.abs((shape_pair.T - shape_pair) - (H - H.T))) <= 1e-7
            # leaf: W, Y with no N component
            Wl = fr.vector(np.r_[rng.normal(size=n + 1), 0.0])
            Yl_field = lambda q: np.r_[1.0, np.zeros(n + 1)]
            nab = covariant_derivative(spec, p, Wl, Yl_field)
            assert abs(fr.components(nab)[-1]) <= 1e-8
            assert np.max(np.abs(fr.components(nab)[1:-1])) <= 1e-8
            c = rng.normal(size=n)
            nab = covariant_derivative(spec, p, Wl, screen_field(spec, c))
            assert abs(fr.components(nab)[-1]) <= 1e-8
            wt, wp = connection_scalars(spec, p, W, fd=True)
            assert abs(wt + wp) <= 1e-7


def test_connection_matrix_is_metric(rng):
    # omega is antisymmetric with respect to the canonical frame Gram matrix
    spec = walker_spec(rng, 3)
    conn = adapted_connection(spec, random_point(rng, 3))
    C = _canonical(3)
    for m in range(5):
        lowered = C @ conn.omega[m]
        assert np.max(np.abs(lowered + lowered.T)) <= 1e-12


def test_degenerate_screen_raises():
    spec = MetricSpec.from_strings(2, "0", {(1, 1): "x2 - 2.5"})
    with pytest.raises(DegenerateScreenError):
        build_frame(spec, P0)
