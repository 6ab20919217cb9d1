import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from walker_holonomy.algebra import LorentzBlockElement, lie_closure, so_basis
from walker_holonomy.classify import classify, orthogonal_part

J = np.array([[0.0, -1.0], [1.0, 0.0]])
Z2 = np.zeros((2, 2))


def el(a, x, A=None):
    x = np.asarray(x, float)
    return LorentzBlockElement(a, x, np.zeros((x.size, x.size)) if A is None else A)


def embed(A, n):
    out = np.zeros((n, n))
    out[:A.shape[0], :A.shape[1]] = A
    return out


def span_angle(mats_a, mats_b):
    """Largest principal angle between spans of two lists of matrices."""
    def orth(mats):
        M = np.array([m.ravel() for m in mats])
        u, s, vt = np.linalg.svd(M, full_matrices=False)
        return vt[s > 1e-10 * s[0]]
    P, Q = orth(mats_a), orth(mats_b)
    if P.shape != Q.shape:
        return np.inf
    s = np.linalg.svd(P - (P @ Q.T) @ Q, compute_uv=False)
    return float(np.arcsin(np.clip(s.max(initial=0.0), 0, 1)))


TYPE2 = [el(0, [1, 0]), el(0, [0, 1])]
TYPE1 = [el(1, [0, 0]), el(0, [1, 0]), el(0, [0, 1]), el(0, [0, 0], J)]
TYPE3 = [el(1, [0, 0], J), el(0, [1, 0]), el(0, [0, 1])]
TYPE4 = [el(0, [1, 0, 0]), el(0, [0, 1, 0]), el(0, [0, 0, 1], embed(J, 3))]


def test_type2_translations():
    rep = classify(lie_closure(TYPE2), 2, 1e-8)
    assert rep.type == 2 and rep.h_dim == 0 and rep.weak_irreducibility_flag


def test_type1_with_boost():
    rep = classify(lie_closure(TYPE1), 2, 1e-8)
    assert rep.type == 1 and rep.h_dim == 1 and rep.center_dim == 1 and rep.h_prime_dim == 0


def test_type3_phi():
    basis = lie_closure(TYPE3)
    rep = classify(basis, 2, 1e-8)
    assert rep.type == 3
    assert rep.h_dim == 1 and rep.center_dim == 1
    assert np.sum(rep.phi * J) == pytest.approx(1.0)       # phi(J) = 1
    assert rep.residuals["phi_on_h_prime"] == 0.0


def test_type4_psi():
    rep = classify(lie_closure(TYPE4), 3, 1e-8)
    assert rep.type == 4 and rep.n1 == 2 and rep.n2 == 1
    direction = rep.psi_directions[0]
    # psi(J) is the e3 coefficient (up to the sign of the chosen direction)
    value = np.sum(rep.psi[0] * embed(J, 3)) * direction[2]
    assert value == pytest.approx(1.0)
    assert rep.residuals["psi_rank_deficit"] == 0


def test_indeterminate_without_weak_irreducibility():
    rep = classify(lie_closure([el(0, [1, 0])]), 2, 1e-8)
    assert rep.type == "indeterminate" and not rep.weak_irreducibility_flag
    rep = classify([], 2, 1e-8)
    assert rep.type == "indeterminate" and rep.algebra_dim == 0


def test_non_block_input_rejected():
    bad = LorentzBlockElement(0, np.ones(2), np.ones((2, 2)))
    with pytest.raises(ValueError):
        classify([bad], 2)


def test_orthogonal_part_of_so3():
    A = np.array([[B[i, j] * np.sqrt(2) for i in range(3) for j in range(i + 1, 3)]
                  for B in so_basis(3)])
    h, hp, z = orthogonal_part(A, 3, 1e-10)
    assert h.shape[0] == 3 and hp.shape[0] == 3 and z.shape[0] == 0


def _recombine(elements, rng):
    vecs = np.array([e.vector() for e in elements])
    M = rng.normal(size=(len(elements), len(elements)))
    n = elements[0].n
    return [LorentzBlockElement.from_vector(v, n) for v in M @ vecs]


def _rotate(elements, Q):
    return [LorentzBlockElement(e.a, e.x_row @ Q, Q.T @ e.a_block @ Q) for e in elements]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["1", "2", "3", "4"]))
def test_invariance_under_basis_change(seed, which):
    rng = np.random.default_rng(seed)
    gens = {"1": TYPE1, "2": TYPE2, "3": TYPE3, "4": TYPE4}[which]
    n = gens[0].n
    ref = classify(lie_closure(gens, 1e-8), n, 1e-8)
    rep = classify(lie_closure(_recombine(gens, rng), 1e-8), n, 1e-8)
    assert rep.type == ref.type
    if ref.h_dim:
        assert span_angle(rep.h_basis, ref.h_basis) <= 1e-8


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from(["1", "2", "3", "4"]))
def test_invariance_under_screen_rotation(seed, which):
    rng = np.random.default_rng(seed)
    gens = {"1": TYPE1, "2": TYPE2, "3": TYPE3, "4": TYPE4}[which]
    n = gens[0].n
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    ref = classify(lie_closure(gens, 1e-8), n, 1e-8)
    rep = classify(lie_closure(_rotate(gens, Q), 1e-8), n, 1e-8)
    assert rep.type == ref.type
    if ref.h_dim:
        conj = [Q.T @ H @ Q for H in ref.h_basis]
        assert span_angle(rep.h_basis, conj) <= 1e-8
    if ref.type == 3:
        # phi transforms by conjugation as well
        np.testing.assert_allclose(rep.phi, Q.T @ ref.phi @ Q, atol=1e-10)


@pytest.mark.parametrize("gens", [TYPE1, TYPE2, TYPE3, TYPE4])
def test_tolerance_stability_on_perturbed_input(gens):
    rng = np.random.default_rng(9)
    n = gens[0].n
    noisy = [LorentzBlockElement.from_vector(e.vector() + 1e-9 * rng.normal(size=e.vector().size), n)
             for e in gens]
    ref = classify(lie_closure(noisy, 1e-6), n, 1e-6).type
    for tol in (1e-7, 1e-5):
        assert classify(lie_closure(noisy, tol), n, tol).type == ref


def test_report_dict_is_plain():
    d = classify(lie_closure(TYPE3), 2, 1e-8).to_dict()
    assert d["type"] == 3 and isinstance(d["phi"], list) and d["psi"] is None
