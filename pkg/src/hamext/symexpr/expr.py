"""Immutable expression trees.

Nodes are built through the module-level constructors (:func:`add`,
:func:`mul`, :func:`power`, :func:`sin`, ...) which keep every tree in
structural canonical form:

* sums and products are flat and have at least two operands,
* constants are folded into a single leading rational,
* like terms and repeated factors are merged,
* ``IntPow`` never carries exponent 0 or 1,
* tagged functions with a structurally zero curvature collapse to their
  flat branch (``Sk(x, 0) -> x``, ``Ck(x, 0) -> 1``).

Operands are ordered by :attr:`Expr.key`, so structural equality is
deterministic. No expansion of products over sums happens here; see
:mod:`hamext.symexpr.laurent` for the expanded normal form.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Mapping, Union

__all__ = [
    "Expr", "Const", "Param", "Var", "Sum", "Product", "IntPow",
    "Sin", "Cos", "Sinh", "Cosh", "TagS", "TagC",
    "const", "var", "param", "add", "mul", "neg", "sub", "div", "power",
    "sin", "cos", "sinh", "cosh", "tag_s", "tag_c", "tag_t",
    "as_expr", "diff", "simplify", "subs", "ZERO", "ONE",
]

Number = Union[int, Fraction]


class Expr:
    """Base class of all expression nodes.

    ``key`` is a nested tuple describing the node structurally; it drives
    equality, hashing and the canonical operand order.
    """

    __slots__ = ("key", "_hash")
    RANK = -1

    def __init__(self, key: tuple, hsh: int):
        self.key = key
        self._hash = hsh

    # structural identity -------------------------------------------------
    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr):
            return NotImplemented
        return self._hash == other._hash and self.key == other.key

    def __ne__(self, other: object) -> bool:
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __lt__(self, other: "Expr") -> bool:
        return self.key < other.key

    def __reduce__(self):
        from .printing import to_text
        from .parser import parse

        return (parse, (to_text(self), frozenset(self.parameters())))

    # arithmetic ----------------------------------------------------------
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __pow__(self, exponent):
        if isinstance(exponent, Const) and exponent.value.denominator == 1:
            exponent = exponent.value.numerator
        if not isinstance(exponent, int) or isinstance(exponent, bool):
            raise TypeError("only integer exponents are supported")
        return power(self, exponent)

    # generic traversal ---------------------------------------------------
    def children(self) -> tuple["Expr", ...]:
        return ()

    def rebuild(self, children: tuple["Expr", ...]) -> "Expr":
        return self

    def symbols(self) -> set["Expr"]:
        out: set[Expr] = set()
        stack = [self]
        seen: set[int] = set()
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if isinstance(node, (Var, Param)):
                out.add(node)
            stack.extend(node.children())
        return out

    def free_symbols(self) -> set[str]:
        """Names of every Var and Param occurring in the tree."""
        return {s.name for s in self.symbols()}

    def variables(self) -> set[str]:
        return {s.name for s in self.symbols() if isinstance(s, Var)}

    def parameters(self) -> set[str]:
        return {s.name for s in self.symbols() if isinstance(s, Param)}

    def is_const(self) -> bool:
        return False

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children())

    # convenience front-ends to the module functions ----------------------
    def diff(self, name: str) -> "Expr":
        return diff(self, name)

    def subs(self, mapping: Mapping[str, "Expr | Number"]) -> "Expr":
        return subs(self, mapping)

    def simplify(self) -> "Expr":
        return simplify(self)

    def expand(self) -> "Expr":
        from .laurent import Laurent

        return Laurent.from_expr(self).to_expr()

    def evaluate(self, bindings):
        from .numeric import evaluate

        return evaluate(self, bindings)

    def __str__(self) -> str:
        from .printing import to_text

        return to_text(self)

    def __repr__(self) -> str:
        return f"Expr({str(self)!r})"

    def latex(self) -> str:
        from .printing import to_latex

        return to_latex(self)


class Const(Expr):
    """Exact rational constant."""

    __slots__ = ("value",)
    RANK = 0

    def __init__(self, value: Fraction):
        self.value = value
        key = (0, value)
        super().__init__(key, hash(key))

    def is_const(self) -> bool:
        return True


class _Symbol(Expr):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        key = (self.RANK, name)
        super().__init__(key, hash(key))


class Param(_Symbol):
    """Named constant (omega, a, kappa, ...): never differentiated."""

    __slots__ = ()
    RANK = 1


class Var(_Symbol):
    """Phase-space variable (coordinate or momentum)."""

    __slots__ = ()
    RANK = 2


class IntPow(Expr):
    __slots__ = ("base", "exp")
    RANK = 3

    def __init__(self, base: Expr, exp: int):
        self.base = base
        self.exp = exp
        super().__init__((3, base.key, exp), hash((3, base._hash, exp)))

    def children(self):
        return (self.base,)

    def rebuild(self, children):
        return power(children[0], self.exp)


class _Unary(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg
        super().__init__((self.RANK, arg.key), hash((self.RANK, arg._hash)))

    def children(self):
        return (self.arg,)


class Sin(_Unary):
    __slots__ = ()
    RANK = 4

    def rebuild(self, children):
        return sin(children[0])


class Cos(_Unary):
    __slots__ = ()
    RANK = 5

    def rebuild(self, children):
        return cos(children[0])


class Sinh(_Unary):
    __slots__ = ()
    RANK = 6

    def rebuild(self, children):
        return sinh(children[0])


class Cosh(_Unary):
    __slots__ = ()
    RANK = 7

    def rebuild(self, children):
        return cosh(children[0])


class _Tagged(Expr):
    __slots__ = ("arg", "kappa")

    def __init__(self, arg: Expr, kappa: Expr):
        self.arg = arg
        self.kappa = kappa
        super().__init__(
            (self.RANK, arg.key, kappa.key),
            hash((self.RANK, arg._hash, kappa._hash)),
        )

    def children(self):
        return (self.arg, self.kappa)


class TagS(_Tagged):
    """Tagged sine S_kappa(arg)."""

    __slots__ = ()
    RANK = 8

    def rebuild(self, children):
        return tag_s(*children)


class TagC(_Tagged):
    """Tagged cosine C_kappa(arg)."""

    __slots__ = ()
    RANK = 9

    def rebuild(self, children):
        return tag_c(*children)


class Product(Expr):
    __slots__ = ("factors",)
    RANK = 10

    def __init__(self, factors: tuple[Expr, ...]):
        self.factors = factors
        super().__init__(
            (10, tuple(f.key for f in factors)),
            hash((10, tuple(f._hash for f in factors))),
        )

    def children(self):
        return self.factors

    def rebuild(self, children):
        return mul(*children)

    def split_coefficient(self) -> tuple[Fraction, Expr]:
        first = self.factors[0]
        if isinstance(first, Const):
            rest = self.factors[1:]
            return first.value, rest[0] if len(rest) == 1 else Product(rest)
        return Fraction(1), self


class Sum(Expr):
    __slots__ = ("terms",)
    RANK = 11

    def __init__(self, terms: tuple[Expr, ...]):
        self.terms = terms
        super().__init__(
            (11, tuple(t.key for t in terms)),
            hash((11, tuple(t._hash for t in terms))),
        )

    def children(self):
        return self.terms

    def rebuild(self, children):
        return add(*children)


# ---------------------------------------------------------------------------
# constructors

ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))
_MINUS_ONE = Const(Fraction(-1))
MINUS_ONE = _MINUS_ONE


def const(value: Number | str) -> Const:
    if isinstance(value, bool):
        raise TypeError("booleans are not constants")
    if isinstance(value, float):
        raise TypeError("floating literals are not allowed in expressions")
    value = Fraction(value)
    if value == 0:
        return ZERO
    if value == 1:
        return ONE
    return Const(value)


def var(name: str) -> Var:
    return Var(name)


def param(name: str) -> Param:
    return Param(name)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Rational)) and not isinstance(value, bool):
        return const(Fraction(value))
    raise TypeError(f"cannot convert {value!r} to an expression")


def _split_term(term: Expr) -> tuple[Fraction, Expr | None]:
    if isinstance(term, Const):
        return term.value, None
    if isinstance(term, Product):
        return term.split_coefficient()
    return Fraction(1), term


def _scaled(coef: Fraction, rest: Expr) -> Expr:
    if coef == 1:
        return rest
    c = const(coef)
    if isinstance(rest, Product):
        return Product((c,) + rest.factors)
    return Product((c, rest))


def add(*args) -> Expr:
    """Canonical sum of the arguments."""
    total = Fraction(0)
    collected: dict[Expr, Fraction] = {}
    stack = [as_expr(a) for a in reversed(args)]
    while stack:
        a = stack.pop()
        if isinstance(a, Sum):
            stack.extend(reversed(a.terms))
            continue
        coef, rest = _split_term(a)
        if rest is None:
            total += coef
        else:
            collected[rest] = collected.get(rest, 0) + coef
    terms = [_scaled(c, r) for r, c in collected.items() if c != 0]
    if total != 0:
        terms.append(const(total))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    terms.sort(key=lambda t: t.key)
    return Sum(tuple(terms))


def mul(*args) -> Expr:
    """Canonical product of the arguments."""
    coef = Fraction(1)
    exps: dict[Expr, int] = {}
    stack = [as_expr(a) for a in reversed(args)]
    while stack:
        a = stack.pop()
        if isinstance(a, Const):
            coef *= a.value
        elif isinstance(a, Product):
            stack.extend(reversed(a.factors))
        elif isinstance(a, IntPow):
            exps[a.base] = exps.get(a.base, 0) + a.exp
        else:
            exps[a] = exps.get(a, 0) + 1
    if coef == 0:
        return ZERO
    factors = []
    for base, e in exps.items():
        if e == 0:
            continue
        f = base if e == 1 else IntPow(base, e)
        factors.append(f)
    if not factors:
        return const(coef)
    if coef != 1 and len(factors) == 1 and isinstance(factors[0], Sum):
        # c*(a + b) -> c*a + c*b keeps like terms collectable
        return add(*(mul(coef, t) for t in factors[0].terms))
    factors.sort(key=lambda f: f.key)
    if coef != 1:
        return Product((const(coef),) + tuple(factors))
    if len(factors) == 1:
        return factors[0]
    return Product(tuple(factors))


def neg(e: Expr) -> Expr:
    return mul(_MINUS_ONE, e)


def sub(a, b) -> Expr:
    return add(a, neg(as_expr(b)))


def div(a, b) -> Expr:
    return mul(a, power(as_expr(b), -1))


def power(base, exp: int) -> Expr:
    base = as_expr(base)
    if not isinstance(exp, int) or isinstance(exp, bool):
        raise TypeError("exponent must be an integer")
    if exp == 0:
        return ONE
    if exp == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and exp < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return const(base.value ** exp)
    if isinstance(base, IntPow):
        return power(base.base, base.exp * exp)
    if isinstance(base, Product):
        return mul(*(power(f, exp) for f in base.factors))
    return IntPow(base, exp)


def _is_negative(e: Expr) -> bool:
    if isinstance(e, Const):
        return e.value < 0
    if isinstance(e, Product):
        first = e.factors[0]
        return isinstance(first, Const) and first.value < 0
    return False


def sin(x) -> Expr:
    x = as_expr(x)
    if x == ZERO:
        return ZERO
    if _is_negative(x):
        return neg(Sin(neg(x)))
    return Sin(x)


def cos(x) -> Expr:
    x = as_expr(x)
    if x == ZERO:
        return ONE
    if _is_negative(x):
        return Cos(neg(x))
    return Cos(x)


def sinh(x) -> Expr:
    x = as_expr(x)
    if x == ZERO:
        return ZERO
    if _is_negative(x):
        return neg(Sinh(neg(x)))
    return Sinh(x)


def cosh(x) -> Expr:
    x = as_expr(x)
    if x == ZERO:
        return ONE
    if _is_negative(x):
        return Cosh(neg(x))
    return Cosh(x)


def tag_s(x, kappa) -> Expr:
    x, kappa = as_expr(x), as_expr(kappa)
    if kappa == ZERO:
        return x
    if x == ZERO:
        return ZERO
    if _is_negative(x):
        return neg(TagS(neg(x), kappa))
    return TagS(x, kappa)


def tag_c(x, kappa) -> Expr:
    x, kappa = as_expr(x), as_expr(kappa)
    if kappa == ZERO or x == ZERO:
        return ONE
    if _is_negative(x):
        return TagC(neg(x), kappa)
    return TagC(x, kappa)


def tag_t(x, kappa) -> Expr:
    """T_kappa = S_kappa / C_kappa; there is no dedicated node."""
    return mul(tag_s(x, kappa), power(tag_c(x, kappa), -1))


# ---------------------------------------------------------------------------
# structural operations


def _map_tree(e: Expr, leaf, memo: dict) -> Expr:
    hit = memo.get(e)
    if hit is not None:
        return hit
    children = e.children()
    if not children:
        out = leaf(e)
    else:
        out = e.rebuild(tuple(_map_tree(c, leaf, memo) for c in children))
    memo[e] = out
    return out


def simplify(e: Expr) -> Expr:
    """Rebuild bottom-up through the canonicalizing constructors.

    Trees produced by this module are already canonical, so this is the
    identity on them; it matters for trees assembled from raw node classes.
    """
    return _map_tree(e, lambda leaf: leaf, {})


def subs(e: Expr, mapping: Mapping[str, Expr | Number]) -> Expr:
    """Replace Var/Param occurrences by name."""
    table = {k: as_expr(v) for k, v in mapping.items()}

    def leaf(node):
        if isinstance(node, (Var, Param)) and node.name in table:
            return table[node.name]
        return node

    return _map_tree(e, leaf, {})


def diff(e: Expr, name: str) -> Expr:
    """Exact derivative with respect to the variable ``name``.

    Params are constants. The curvature of a tagged function must not
    depend on ``name``.
    """
    return _diff(e, name, {})


def _diff(e: Expr, v: str, memo: dict) -> Expr:
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, Var):
        out = ONE if e.name == v else ZERO
    elif isinstance(e, (Const, Param)):
        out = ZERO
    elif isinstance(e, Sum):
        out = add(*(_diff(t, v, memo) for t in e.terms))
    elif isinstance(e, Product):
        parts = []
        fs = e.factors
        for i, f in enumerate(fs):
            df = _diff(f, v, memo)
            if df != ZERO:
                parts.append(mul(*fs[:i], df, *fs[i + 1:]))
        out = add(*parts)
    elif isinstance(e, IntPow):
        db = _diff(e.base, v, memo)
        out = ZERO if db == ZERO else mul(e.exp, power(e.base, e.exp - 1), db)
    elif isinstance(e, _Unary):
        da = _diff(e.arg, v, memo)
        if da == ZERO:
            out = ZERO
        elif isinstance(e, Sin):
            out = mul(cos(e.arg), da)
        elif isinstance(e, Cos):
            out = mul(_MINUS_ONE, sin(e.arg), da)
        elif isinstance(e, Sinh):
            out = mul(cosh(e.arg), da)
        else:
            out = mul(sinh(e.arg), da)
    elif isinstance(e, _Tagged):
        if v in e.kappa.variables():
            raise ValueError(f"curvature of {e} depends on {v!r}")
        da = _diff(e.arg, v, memo)
        if da == ZERO:
            out = ZERO
        elif isinstance(e, TagS):
            out = mul(tag_c(e.arg, e.kappa), da)
        else:
            out = mul(_MINUS_ONE, e.kappa, tag_s(e.arg, e.kappa), da)
    else:  # pragma: no cover
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = out
    return out


def walk(e: Expr) -> Iterable[Expr]:
    """Pre-order traversal."""
    yield e
    for c in e.children():
        yield from walk(c)
