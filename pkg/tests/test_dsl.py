import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from walker_holonomy.dsl import (Add, Call, Mul, Neg, Num, Pow, Var, compile_exprs,
                                 compile_exprs_vectorized, diff_expr, eval_expr,
                                 parse_expr, parse_metric_spec, simplify, to_string)
from walker_holonomy.errors import (CoordinateRangeError, DomainError, ParseError,
                                    SpecError, UnknownSymbolError)

N = 2
D = N + 2


def test_grammar_examples():
    assert parse_expr("x1^2 + x2^2", N) == Add(Pow(Var(1), Num(2.0)), Pow(Var(2), Num(2.0)))
    assert parse_expr("-(x0*x1)", N) == Neg(Mul(Var(0), Var(1)))


def test_precedence_and_associativity():
    p = [0.0, 2.0, 3.0, 0.0]
    assert eval_expr(parse_expr("2^3^2", N), p) == 512.0
    assert eval_expr(parse_expr("-x1^2", N), p) == -4.0
    assert eval_expr(parse_expr("x2 - x1 - 1", N), p) == 0.0
    assert eval_expr(parse_expr("12 / x1 / x2", N), p) == 2.0
    assert eval_expr(parse_expr("1 + x1 * x2", N), p) == 7.0


def test_errors_carry_offsets():
    with pytest.raises(CoordinateRangeError):
        parse_expr("x7", N)
    with pytest.raises(UnknownSymbolError):
        parse_expr("y + 1", N)
    with pytest.raises(ParseError) as info:
        parse_expr("x1 + * 2", N)
    assert info.value.offset == 5
    with pytest.raises(ParseError):
        parse_expr("   ", N)
    with pytest.raises(ParseError):
        parse_expr("sin x1", N)


def test_offset_is_in_bytes():
    with pytest.raises(ParseError) as info:
        parse_expr("x1 + é", N)
    assert info.value.offset == 5


def test_eval_examples():
    assert eval_expr(parse_expr("x1^2+x2^2", N), [0, 1, 2, 0]) == 5.0
    assert eval_expr(parse_expr("0", N), [3, 1, 4, 1]) == 0.0
    assert eval_expr(parse_expr("exp(x0)*x1", N), [0, 3, 0, 0]) == 3.0


@pytest.mark.parametrize("text", ["log(x1)", "1/x1", "sqrt(x1 - 1)", "x2^0.5 * (0 - 1)^0.5"])
def test_domain_errors_are_reported(text):
    with pytest.raises(DomainError):
        eval_expr(parse_expr(text, N), [0.0, 0.0, 1.0, 0.0])


def test_diff_examples():
    assert to_string(diff_expr(parse_expr("x1^2+x2^2", N), 1)) == "2*x1"
    assert to_string(diff_expr(parse_expr("x1^2+x2^2", N), 0)) == "0"
    got = diff_expr(parse_expr("sin(x1*x3)", N), 1)
    assert got == Mul(Call("cos", Mul(Var(1), Var(3))), Var(3))


def test_simplify_is_idempotent():
    e = diff_expr(parse_expr("x1*x2*sin(x3) + exp(2*x1) - x2^3/x1", N), 1)
    once = simplify(e)
    assert simplify(once) == once


def test_aliases_are_canonical():
    a = parse_expr("u*v", N, {"u": 0, "v": 3})
    assert a == parse_expr("x0*x3", N)


# ---------------------------------------------------------------------------
# property tests
# ---------------------------------------------------------------------------

leaves = st.one_of(
    st.integers(1, 5).map(lambda k: str(k)),
    st.sampled_from([f"x{i}" for i in range(D)]),
)


def _combine(children):
    binop = st.tuples(children, st.sampled_from(["+", "-", "*"]), children).map(
        lambda t: f"({t[0]} {t[1]} {t[2]})")
    power = st.tuples(children, st.integers(0, 3)).map(lambda t: f"({t[0]})^{t[1]}")
    func = st.tuples(st.sampled_from(["sin", "cos"]), children).map(lambda t: f"{t[0]}({t[1]})")
    return st.one_of(binop, power, func, children.map(lambda c: f"-{c}"))


expressions = st.recursive(leaves, _combine, max_leaves=8)
points = st.lists(st.floats(-1.5, 1.5), min_size=D, max_size=D)


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(a), abs(b))


@settings(max_examples=60, deadline=None)
@given(expressions, points)
def test_print_parse_roundtrip_by_value(text, p):
    e = parse_expr(text, N)
    again = parse_expr(to_string(e), N)
    assert _rel(eval_expr(e, p), eval_expr(again, p)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(expressions, st.integers(0, D - 1), points)
def test_derivative_matches_central_difference(text, k, p):
    e = parse_expr(text, N)
    de = diff_expr(e, k)
    h = 1e-5 * (1 + abs(p[k]))
    up, dn = list(p), list(p)
    up[k] += h
    dn[k] -= h
    fd = (eval_expr(e, up) - eval_expr(e, dn)) / (2 * h)
    exact = eval_expr(de, p)
    scale = max(1.0, abs(exact), abs(eval_expr(e, p)))
    assert abs(exact - fd) / scale <= 1e-6


@settings(max_examples=60, deadline=None)
@given(expressions, st.integers(0, D - 1), st.integers(0, D - 1), points)
def test_mixed_partials_commute(text, j, k, p):
    e = parse_expr(text, N)
    a = eval_expr(diff_expr(diff_expr(e, j), k), p)
    b = eval_expr(diff_expr(diff_expr(e, k), j), p)
    assert _rel(a, b) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(expressions, min_size=1, max_size=4), st.lists(points, min_size=1, max_size=5))
def test_compiled_evaluators_agree_with_interpreter(texts, pts):
    es = [parse_expr(t, N) for t in texts]
    fn = compile_exprs(es)
    vfn = compile_exprs_vectorized(es)
    batch = vfn(np.array(pts))
    for row, p in zip(batch, pts):
        ref = np.array([eval_expr(e, p) for e in es])
        np.testing.assert_allclose(fn(p), ref, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(row, ref, rtol=1e-12, atol=1e-12)


def test_vectorized_domain_error():
    fn = compile_exprs_vectorized([parse_expr("log(x1)", N)])
    with pytest.raises(DomainError):
        fn(np.array([[0.0, 1.0, 0.0, 0.0], [0.0, -1.0, 0.0, 0.0]]))


# ---------------------------------------------------------------------------
# metric documents
# ---------------------------------------------------------------------------

def test_document_defaults_to_identity_screen():
    spec = parse_metric_spec('n = 2\nf = "x1^2 + x2^2"\n# g defaults to identity\n')
    assert spec.n == 2
    assert to_string(spec.g[0][0]) == "1" and to_string(spec.g[0][1]) == "0"


def test_flat_document():
    spec = parse_metric_spec('n = 2\nf = "0"\n')
    assert to_string(spec.f) == "0"


def test_symmetric_completion_and_aliases():
    doc = 'n = 3\naliases = u=x4\nf = "x1*u"  # trailing comment\ng_1_2 = "0.1*u"\n'
    spec = parse_metric_spec(doc)
    assert spec.g[0][1] == spec.g[1][0] == parse_expr("0.1*x4", 3)
    assert spec.f == parse_expr("x1*x4", 3)
    assert parse_metric_spec(spec.to_document()) == spec


@pytest.mark.parametrize("doc, needle", [
    ('n = 2\nf = "0"\ng_1_1 = "x0"\n', "x0"),
    ('n = 2\nf = "0"\ng_1_2 = "x1"\ng_2_1 = "x2"\n', "differ"),
    ('n = 2\n', "missing key 'f'"),
    ('f = "0"\n', "missing key 'n'"),
    ('n = 0\nf = "0"\n', "n must be"),
    ('n = two\nf = "0"\n', "integer"),
    ('n = 2\nf = "0"\ng_1_3 = "1"\n', "indices"),
    ('n = 2\nf = x1\n', "double-quoted"),
    ('n = 2\nf = "0"\nh = "1"\n', "unknown key"),
])
def test_document_errors(doc, needle):
    with pytest.raises(SpecError, match=needle):
        parse_metric_spec(doc)


def test_document_parse_error_reports_line():
    with pytest.raises(ParseError, match="line 2"):
        parse_metric_spec('n = 2\nf = "x1 + * 2"\n')


def test_pow_integer_fast_path_matches_math():
    e = parse_expr("x1^3 - x2^(-2)", N)
    p = [0.0, -1.7, 0.3, 0.0]
    assert math.isclose(eval_expr(e, p), (-1.7) ** 3 - 0.3 ** -2, rel_tol=1e-14)
