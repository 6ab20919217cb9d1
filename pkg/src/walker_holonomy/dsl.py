"""Scalar expression language for Walker metric data.

Expressions are immutable trees over coordinates ``x0 .. x{n+1}``. The module
parses them, prints them back, evaluates them in double precision,
differentiates them symbolically, and compiles batches of them into plain
Python callables for the numerical kernels.

Grammar (precedence high to low)::

    atom   := number | coord | const | func '(' expr ')' | '(' expr ')'
    power  := atom ('^' unary)?          # right associative
    unary  := '-' unary | '+' unary | power
    term   := unary (('*' | '/') unary)*
    expr   := term (('+' | '-') term)*
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import (
    CoordinateRangeError,
    DomainError,
    ParseError,
    SpecError,
    UnknownSymbolError,
)

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")
CONSTANTS = {"pi": math.pi, "e": math.e}


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Add:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Sub:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Mul:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Div:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr"


Expr = Union[Num, Var, Const, Neg, Add, Sub, Mul, Div, Pow, Call]
BINARY = (Add, Sub, Mul, Div, Pow)
ZERO = Num(0.0)
ONE = Num(1.0)


def free_vars(e: Expr) -> frozenset[int]:
    """Coordinate indices that occur in ``e``."""
    if isinstance(e, Var):
        return frozenset((e.index,))
    if isinstance(e, (Num, Const)):
        return frozenset()
    if isinstance(e, (Neg, Call)):
        return free_vars(e.arg)
    return free_vars(e.left) | free_vars(e.right)


def is_zero(e: Expr) -> bool:
    return isinstance(e, Num) and e.value == 0.0


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)
_COORD_RE = re.compile(r"x(\d+)$")


@dataclass
class _Token:
    kind: str
    text: str
    offset: int  # byte offset


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}",
                             _byte_offset(text, pos))
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), _byte_offset(text, pos)))
        pos = m.end()
    tokens.append(_Token("end", "", _byte_offset(text, len(text))))
    return tokens


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, text: str, n: int, aliases: Mapping[str, int]):
        self.tokens = _tokenize(text)
        self.i = 0
        self.n = n
        self.aliases = aliases

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def take(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        tok = self.take()
        if tok.text != text:
            found = tok.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", tok.offset)

    def parse(self) -> Expr:
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected token {tok.text!r}", tok.offset)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.take().text
            rhs = self.term()
            e = Add(e, rhs) if op == "+" else Sub(e, rhs)
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek().text in ("*", "/"):
            op = self.take().text
            rhs = self.unary()
            e = Mul(e, rhs) if op == "*" else Div(e, rhs)
        return e

    def unary(self) -> Expr:
        tok = self.peek()
        if tok.text == "-":
            self.take()
            return Neg(self.unary())
        if tok.text == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.peek().text == "^":
            self.take()
            return Pow(base, self.unary())
        return base

    def atom(self) -> Expr:
        tok = self.take()
        if tok.kind == "num":
            return Num(float(tok.text))
        if tok.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "name":
            return self.name(tok)
        found = tok.text or "end of input"
        raise ParseError(f"unexpected token {found!r}", tok.offset)

    def name(self, tok: _Token) -> Expr:
        name = tok.text
        if name in FUNCTIONS:
            if self.peek().text != "(":
                raise ParseError(f"function {name!r} needs an argument",
                                 self.peek().offset)
            self.take()
            arg = self.expr()
            self.expect(")")
            return Call(name, arg)
        if name in self.aliases:
            return Var(self.aliases[name])
        m = _COORD_RE.match(name)
        if m:
            index = int(m.group(1))
            if index > self.n + 1:
                raise CoordinateRangeError(
                    f"coordinate {name} out of range x0..x{self.n + 1}", tok.offset)
            return Var(index)
        if name in CONSTANTS:
            return Const(name)
        raise UnknownSymbolError(f"unknown symbol {name!r}", tok.offset)


def parse_expr(text: str, n: int, aliases: Mapping[str, int] | None = None) -> Expr:
    """Parse ``text`` into an expression over coordinates ``x0 .. x{n+1}``.

    ``aliases`` maps extra names (e.g. ``u``) to coordinate indices.
    """
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    return _Parser(text, n, aliases or {}).parse()


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Neg: 3, Pow: 4}
_SYMBOL = {Add: " + ", Sub: " - ", Mul: "*", Div: "/", Pow: "^"}


def _prec(e: Expr) -> int:
    if isinstance(e, Num) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return 3
    return _PREC.get(type(e), 5)


def _format_number(v: float) -> str:
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v)) if v != 0 else "0"
    return repr(v)


def to_string(e: Expr) -> str:
    """Render ``e`` in the input grammar with minimal parentheses."""
    if isinstance(e, Num):
        return _format_number(e.value)
    if isinstance(e, Var):
        return f"x{e.index}"
    if isinstance(e, Const):
        return e.name
    if isinstance(e, Call):
        return f"{e.func}({to_string(e.arg)})"
    if isinstance(e, Neg):
        return "-" + _wrap(e.arg, 3)
    p = _PREC[type(e)]
    if isinstance(e, Pow):
        return _wrap(e.left, 5) + "^" + _wrap(e.right, 3)
    return _wrap(e.left, p) + _SYMBOL[type(e)] + _wrap(e.right, p + 1)


def _wrap(e: Expr, need: int) -> str:
    s = to_string(e)
    return s if _prec(e) >= need else f"({s})"


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _pow(a: float, b: float) -> float:
    try:
        if b == int(b) and abs(b) < 2 ** 31:
            return a ** int(b)
        if a < 0:
            raise DomainError(f"negative base {a!r} with non-integer exponent {b!r}")
        if a == 0 and b < 0:
            raise DomainError("zero raised to a negative power")
        return math.pow(a, b)
    except ZeroDivisionError:
        raise DomainError("zero raised to a negative power") from None
    except OverflowError:
        raise DomainError("overflow in power") from None


def _log(a: float) -> float:
    if a <= 0:
        raise DomainError(f"log of nonpositive value {a!r}")
    return math.log(a)


def _sqrt(a: float) -> float:
    if a < 0:
        raise DomainError(f"sqrt of negative value {a!r}")
    return math.sqrt(a)


def _exp(a: float) -> float:
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError(f"exp overflow at {a!r}") from None


def _div(a: float, b: float) -> float:
    if b == 0:
        raise DomainError("division by zero")
    return a / b


_FUNC_IMPL: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": _exp,
    "log": _log,
    "sqrt": _sqrt,
}


def _eval(e: Expr, x: Sequence[float]) -> float:
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return x[e.index]
    if isinstance(e, Const):
        return CONSTANTS[e.name]
    if isinstance(e, Neg):
        return -_eval(e.arg, x)
    if isinstance(e, Call):
        return _FUNC_IMPL[e.func](_eval(e.arg, x))
    a = _eval(e.left, x)
    b = _eval(e.right, x)
    if isinstance(e, Add):
        return a + b
    if isinstance(e, Sub):
        return a - b
    if isinstance(e, Mul):
        return a * b
    if isinstance(e, Div):
        return _div(a, b)
    return _pow(a, b)


def eval_expr(e: Expr, point: Sequence[float]) -> float:
    """Evaluate ``e`` at ``point`` (coordinates ``x0 .. x{n+1}``).

    Raises DomainError instead of returning NaN or infinity.
    """
    value = _eval(e, [float(c) for c in point])
    if not math.isfinite(value):
        raise DomainError(f"non-finite result {value!r}")
    return value


def _codegen(e: Expr) -> str:
    if isinstance(e, Num):
        return repr(e.value)
    if isinstance(e, Var):
        return f"x[{e.index}]"
    if isinstance(e, Const):
        return repr(CONSTANTS[e.name])
    if isinstance(e, Neg):
        return f"(-{_codegen(e.arg)})"
    if isinstance(e, Call):
        return f"_{e.func}({_codegen(e.arg)})"
    a, b = _codegen(e.left), _codegen(e.right)
    if isinstance(e, Add):
        return f"({a} + {b})"
    if isinstance(e, Sub):
        return f"({a} - {b})"
    if isinstance(e, Mul):
        return f"({a} * {b})"
    if isinstance(e, Div):
        return f"_div({a}, {b})"
    return f"_pow({a}, {b})"


_CODEGEN_NS = {
    "_sin": math.sin,
    "_cos": math.cos,
    "_exp": _exp,
    "_log": _log,
    "_sqrt": _sqrt,
    "_div": _div,
    "_pow": _pow,
}


def compile_exprs(exprs: Sequence[Expr]) -> Callable[[Sequence[float]], np.ndarray]:
    """Compile a batch of expressions into one function of a point.

    The returned callable maps a coordinate sequence to a float array of the
    same length as ``exprs``; it has the same semantics as ``eval_expr``.
    """
    body = ", ".join(_codegen(e) for e in exprs)
    src = f"def _batch(x):\n    return [{body}]\n"
    ns = dict(_CODEGEN_NS)
    exec(compile(src, "<walker-expr>", "exec"), ns)
    batch = ns["_batch"]

    def evaluate(point: Sequence[float]) -> np.ndarray:
        out = np.array(batch([float(c) for c in point]), dtype=float)
        if not np.all(np.isfinite(out)):
            raise DomainError("non-finite value while evaluating metric data")
        return out

    return evaluate



def _vcheck(mask, message: str) -> None:
    if np.any(mask):
        raise DomainError(message)


def _vpow(a, b):
    if isinstance(b, float) and b.is_integer() and abs(b) < 64:
        if b < 0:
            _vcheck(a == 0, "zero raised to a negative power")
        return a ** int(b)
    _vcheck((a < 0) & (b != np.round(b)), "negative base with non-integer exponent")
    _vcheck((a == 0) & (b < 0), "zero raised to a negative power")
    return np.power(a, b)


def _vlog(a):
    _vcheck(a <= 0, "log of nonpositive value")
    return np.log(a)


def _vsqrt(a):
    _vcheck(a < 0, "sqrt of negative value")
    return np.sqrt(a)


def _vdiv(a, b):
    _vcheck(b == 0, "division by zero")
    return a / b


_VECTOR_NS = {
    "_sin": np.sin,
    "_cos": np.cos,
    "_exp": np.exp,
    "_log": _vlog,
    "_sqrt": _vsqrt,
    "_div": _vdiv,
    "_pow": _vpow,
}


def compile_exprs_vectorized(exprs: Sequence[Expr]) -> Callable[[np.ndarray], np.ndarray]:
    """Like compile_exprs, but maps a (K, d) array of points to (K, len(exprs))."""
    body = ", ".join(_codegen(e) for e in exprs)
    src = f"def _batch(x):\n    return [{body}]\n"
    ns = dict(_VECTOR_NS)
    exec(compile(src, "<walker-expr-vec>", "exec"), ns)
    batch = ns["_batch"]

    def evaluate(points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        k = pts.shape[0]
        out = np.empty((k, len(exprs)))
        with np.errstate(all="ignore"):
            for j, v in enumerate(batch(list(pts.T))):
                out[:, j] = v
        if not np.all(np.isfinite(out)):
            raise DomainError("non-finite value while evaluating metric data")
        return out

    return evaluate

# ---------------------------------------------------------------------------
# Simplification and differentiation
# ---------------------------------------------------------------------------

def _is_const(e: Expr) -> bool:
    return isinstance(e, (Num, Const))


def simplify(e: Expr) -> Expr:
    """Constant folding plus 0/1 identity elimination (not a canonical form)."""
    if isinstance(e, (Num, Var, Const)):
        return e
    if isinstance(e, Neg):
        a = simplify(e.arg)
        if isinstance(a, Num):
            return Num(-a.value)
        if isinstance(a, Neg):
            return a.arg
        return Neg(a)
    if isinstance(e, Call):
        a = simplify(e.arg)
        return _fold(Call(e.func, a)) if _is_const(a) else Call(e.func, a)
    a, b = simplify(e.left), simplify(e.right)
    if _is_const(a) and _is_const(b):
        return _fold(type(e)(a, b))
    if isinstance(e, Add):
        if is_zero(a):
            return b
        if is_zero(b):
            return a
        return Add(a, b)
    if isinstance(e, Sub):
        if is_zero(b):
            return a
        if is_zero(a):
            return simplify(Neg(b))
        return Sub(a, b)
    if isinstance(e, Mul):
        if is_zero(a) or is_zero(b):
            return ZERO
        if a == ONE:
            return b
        if b == ONE:
            return a
        return Mul(a, b)
    if isinstance(e, Div):
        if is_zero(a):
            return ZERO
        if b == ONE:
            return a
        return Div(a, b)
    # Pow
    if is_zero(b) or a == ONE:
        return ONE
    if b == ONE:
        return a
    return Pow(a, b)


def _fold(e: Expr) -> Expr:
    try:
        value = _eval(e, ())
    except DomainError:
        return e
    return Num(value) if math.isfinite(value) else e


def _diff(e: Expr, k: int) -> Expr:
    if isinstance(e, (Num, Const)):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.index == k else ZERO
    if k not in free_vars(e):
        return ZERO
    if isinstance(e, Neg):
        return Neg(_diff(e.arg, k))
    if isinstance(e, Add):
        return Add(_diff(e.left, k), _diff(e.right, k))
    if isinstance(e, Sub):
        return Sub(_diff(e.left, k), _diff(e.right, k))
    if isinstance(e, Mul):
        u, v = e.left, e.right
        return Add(Mul(_diff(u, k), v), Mul(u, _diff(v, k)))
    if isinstance(e, Div):
        u, v = e.left, e.right
        return Div(Sub(Mul(_diff(u, k), v), Mul(u, _diff(v, k))), Pow(v, Num(2.0)))
    if isinstance(e, Pow):
        u, v = e.left, e.right
        if k not in free_vars(v):
            return Mul(Mul(v, Pow(u, Sub(v, ONE))), _diff(u, k))
        if k not in free_vars(u):
            return Mul(Mul(e, Call("log", u)), _diff(v, k))
        return Mul(e, Add(Mul(_diff(v, k), Call("log", u)),
                          Div(Mul(v, _diff(u, k)), u)))
    u = e.arg
    du = _diff(u, k)
    if e.func == "sin":
        return Mul(Call("cos", u), du)
    if e.func == "cos":
        return Mul(Neg(Call("sin", u)), du)
    if e.func == "exp":
        return Mul(e, du)
    if e.func == "log":
        return Div(du, u)
    return Div(du, Mul(Num(2.0), e))  # sqrt


def diff_expr(e: Expr, k: int) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to coordinate ``k``."""
    if k < 0:
        raise CoordinateRangeError(f"coordinate index {k} is negative")
    return simplify(_diff(e, k))


# ---------------------------------------------------------------------------
# Metric specification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSpec:
    """Walker metric ``2 dx0 dx{n+1} + g_ij dx^i dx^j + f (dx{n+1})^2``.

    ``g`` is the n x n screen block (index 0 is coordinate x1); ``f`` may
    depend on every coordinate, ``g`` never on x0.
    """

    n: int
    f: Expr
    g: tuple[tuple[Expr, ...], ...]
    aliases: tuple[tuple[str, int], ...] = ()
    source: str = field(default="", compare=False, repr=False)

    def __post_init__(self):
        _validate_spec(self)

    @property
    def dim(self) -> int:
        return self.n + 2

    @classmethod
    def from_strings(cls, n: int, f: str, g: Mapping[tuple[int, int], str] | None = None,
                     aliases: Mapping[str, int] | None = None) -> "MetricSpec":
        """Build a spec from expression strings; ``g`` keys are 1-based (i, j)."""
        alias_map = dict(aliases or {})
        if not isinstance(n, int) or n < 1:
            raise SpecError(f"screen dimension n must be an integer >= 1, got {n!r}")
        f_expr = parse_expr(f, n, alias_map)
        entries: dict[tuple[int, int], Expr] = {}
        for (i, j), text in (g or {}).items():
            if not (1 <= i <= n and 1 <= j <= n):
                raise SpecError(f"g_{i}_{j}: indices must lie in 1..{n}")
            entries[(i, j)] = parse_expr(text, n, alias_map)
        return cls(n=n, f=f_expr, g=_assemble_g(n, entries),
                   aliases=tuple(sorted(alias_map.items())))

    def to_document(self) -> str:
        lines = [f"n = {self.n}", f'f = "{to_string(self.f)}"']
        if self.aliases:
            lines.append("aliases = " + ", ".join(f"{a}=x{i}" for a, i in self.aliases))
        for i in range(self.n):
            for j in range(i, self.n):
                default = ONE if i == j else ZERO
                if self.g[i][j] != default:
                    lines.append(f'g_{i + 1}_{j + 1} = "{to_string(self.g[i][j])}"')
        return "\n".join(lines) + "\n"


def _assemble_g(n: int, entries: Mapping[tuple[int, int], Expr]) -> tuple[tuple[Expr, ...], ...]:
    rows = [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]
    for (i, j), e in entries.items():
        other = entries.get((j, i))
        if other is not None and other != e:
            raise SpecError(f"g_{i}_{j} and g_{j}_{i} differ: screen metric must be symmetric")
        rows[i - 1][j - 1] = e
        rows[j - 1][i - 1] = e
    return tuple(tuple(r) for r in rows)


def _validate_spec(spec: MetricSpec) -> None:
    n = spec.n
    if not isinstance(n, int) or n < 1:
        raise SpecError(f"screen dimension n must be an integer >= 1, got {n!r}")
    if len(spec.g) != n or any(len(row) != n for row in spec.g):
        raise SpecError(f"screen metric must be {n}x{n}")
    top = n + 1
    for e in [spec.f, *(x for row in spec.g for x in row)]:
        bad = [k for k in free_vars(e) if k > top]
        if bad:
            raise SpecError(f"coordinate x{bad[0]} out of range x0..x{top}")
    for i in range(n):
        for j in range(n):
            if spec.g[i][j] != spec.g[j][i]:
                raise SpecError(f"screen metric not symmetric at ({i + 1}, {j + 1})")
            if not is_zero(diff_expr(spec.g[i][j], 0)):
                raise SpecError(f"g_{i + 1}_{j + 1} depends on x0; Walker form forbids it")


_LINE_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*=\s*(.*?)\s*$")
_G_KEY_RE = re.compile(r"^g_(\d+)_(\d+)$")
_ALIAS_RE = re.compile(r"^\s*([A-Za-z_][A-Za-z_0-9]*)\s*[=:]\s*x(\d+)\s*$")


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _unquote(value: str, key: str, lineno: int) -> str:
    if len(value) >= 2 and value[0] == value[-1] == '"':
        return value[1:-1]
    raise SpecError(f"line {lineno}: value of {key!r} must be a double-quoted expression")


def _parse_aliases(value: str, n: int, lineno: int) -> dict[str, int]:
    if len(value) >= 2 and value[0] == value[-1] == '"':
        value = value[1:-1]
    out: dict[str, int] = {}
    for item in re.split(r"[,\s]+(?=[A-Za-z_])", value.strip()):
        if not item.strip():
            continue
        m = _ALIAS_RE.match(item)
        if m is None:
            raise SpecError(f"line {lineno}: bad alias {item.strip()!r} (want name=xK)")
        name, index = m.group(1), int(m.group(2))
        if name in FUNCTIONS or name in CONSTANTS or _COORD_RE.match(name):
            raise SpecError(f"line {lineno}: alias {name!r} shadows a reserved name")
        if index > n + 1:
            raise SpecError(f"line {lineno}: alias target x{index} out of range")
        out[name] = index
    return out


def parse_metric_spec(document: str) -> MetricSpec:
    """Read the line-oriented ``key = value`` metric document."""
    raw: dict[str, tuple[str, int]] = {}
    for lineno, line in enumerate(document.splitlines(), start=1):
        line = _strip_comment(line).strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if m is None:
            raise SpecError(f"line {lineno}: expected 'key = value'")
        key, value = m.group(1), m.group(2)
        if key in raw:
            raise SpecError(f"line {lineno}: duplicate key {key!r}")
        if key not in ("n", "f", "aliases") and not _G_KEY_RE.match(key):
            raise SpecError(f"line {lineno}: unknown key {key!r}")
        raw[key] = (value, lineno)

    if "n" not in raw:
        raise SpecError("missing key 'n'")
    n_text, n_line = raw.pop("n")
    try:
        n = int(n_text.strip('"'))
    except ValueError:
        raise SpecError(f"line {n_line}: n must be an integer, got {n_text!r}") from None
    if n < 1:
        raise SpecError(f"line {n_line}: n must be >= 1, got {n}")
    aliases: dict[str, int] = {}
    if "aliases" in raw:
        a_text, a_line = raw.pop("aliases")
        aliases = _parse_aliases(a_text, n, a_line)
    if "f" not in raw:
        raise SpecError("missing key 'f'")
    f_text, f_line = raw.pop("f")
    f = _parse_field(_unquote(f_text, "f", f_line), n, aliases, f_line)

    entries: dict[tuple[int, int], Expr] = {}
    for key, (value, lineno) in raw.items():
        m = _G_KEY_RE.match(key)
        i, j = int(m.group(1)), int(m.group(2))
        if not (1 <= i <= n and 1 <= j <= n):
            raise SpecError(f"line {lineno}: {key} indices must lie in 1..{n}")
        entries[(i, j)] = _parse_field(_unquote(value, key, lineno), n, aliases, lineno)
    return MetricSpec(n=n, f=f, g=_assemble_g(n, entries),
                      aliases=tuple(sorted(aliases.items())), source=document)


def _parse_field(text: str, n: int, aliases: Mapping[str, int], lineno: int) -> Expr:
    try:
        return parse_expr(text, n, aliases)
    except ParseError as exc:
        exc.args = (f"line {lineno}: {exc.args[0]}",)
        raise


def as_point(coords: Iterable[float], n: int) -> np.ndarray:
    """Validate a point of the (n+2)-dimensional chart."""
    p = np.asarray(list(coords), dtype=float)
    if p.shape != (n + 2,):
        raise ValueError(f"point must have {n + 2} coordinates, got {p.size}")
    if not np.all(np.isfinite(p)):
        raise ValueError("point coordinates must be finite")
    return p
