"""Expanded normal form: sparse Laurent polynomials over atoms.

An *atom* is any expression that is not a sum, product, power or constant:
variables, parameters, sin/cos/sinh/cosh nodes and tagged functions. A sum
that appears under a negative power (an irreducible denominator such as
``1/(1 + x^2)``) is also treated as an atom. Every expression therefore
expands to a finite sum of ``coef * prod(atom**k)`` with rational ``coef``
and integer (possibly negative) ``k``.

Monomials are tuples of ``(atom, exponent)`` pairs sorted by atom key, which
makes the representation of a given expanded sum unique. Trigonometric
identities are *not* applied, so two mathematically equal expressions may
still expand differently; numeric zero tests settle those cases.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping

from . import expr as E

__all__ = ["Laurent", "Mono", "mono_mul", "normalize_atom"]

Mono = tuple  # tuple[tuple[E.Expr, int], ...]


def _norm(c):
    if type(c) is Fraction and c.denominator == 1:
        return c.numerator
    return c


def _akey(item):
    return item[0].key


def mono_mul(a: Mono, b: Mono) -> Mono:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for atom, k in b:
        s = d.get(atom, 0) + k
        if s:
            d[atom] = s
        else:
            del d[atom]
    return tuple(sorted(d.items(), key=_akey))


def mono_pow(a: Mono, k: int) -> Mono:
    return tuple((atom, e * k) for atom, e in a) if k else ()


class Laurent:
    """Immutable sparse polynomial ``{monomial: rational}`` over atoms."""

    __slots__ = ("terms", "_expr", "_compiled", "_symbols")

    def __init__(self, terms: Mapping[Mono, object] | None = None, *, _trusted: bool = False):
        if terms is None:
            terms = {}
        elif not _trusted:
            terms = {m: _norm(c) for m, c in terms.items() if c != 0}
        self.terms: dict = terms
        self._expr = None
        self._compiled = None
        self._symbols = None

    # construction ------------------------------------------------------
    @classmethod
    def constant(cls, value) -> "Laurent":
        value = _norm(Fraction(value))
        return cls({(): value} if value else {}, _trusted=True)

    @classmethod
    def atom(cls, atom: E.Expr, exponent: int = 1) -> "Laurent":
        return cls({((atom, exponent),): 1}, _trusted=True)

    @classmethod
    def from_expr(cls, e: E.Expr) -> "Laurent":
        return _from_expr(e, {})

    def to_expr(self) -> E.Expr:
        if self._expr is None:
            self._expr = E.add(*(
                E.mul(E.const(Fraction(c)), *(E.power(a, k) for a, k in mono))
                for mono, c in self.terms.items()
            ))
        return self._expr

    # inspection ----------------------------------------------------------
    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, Laurent):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def atoms(self) -> set[E.Expr]:
        return {a for mono in self.terms for a, _ in mono}

    def free_symbols(self) -> set[str]:
        if self._symbols is None:
            out: set[str] = set()
            for a in self.atoms():
                out |= _atom_symbols(a)
            self._symbols = frozenset(out)
        return set(self._symbols)

    def constant_value(self):
        """The rational value if this is a constant, else ``None``."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and () in self.terms:
            return Fraction(self.terms[()])
        return None

    def __str__(self) -> str:
        return str(self.to_expr())

    def __repr__(self) -> str:
        return f"Laurent({str(self)!r})"

    # arithmetic -----------------------------------------------------------
    def __add__(self, other) -> "Laurent":
        other = _coerce(other)
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = _norm(s)
            else:
                del out[m]
        return Laurent(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "Laurent":
        return Laurent({m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other) -> "Laurent":
        return self + (-_coerce(other))

    def __rsub__(self, other) -> "Laurent":
        return _coerce(other) - self

    def scale(self, c) -> "Laurent":
        c = _norm(Fraction(c))
        if c == 0:
            return Laurent()
        if c == 1:
            return self
        return Laurent({m: _norm(v * c) for m, v in self.terms.items()}, _trusted=True)

    def __mul__(self, other) -> "Laurent":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = _coerce(other)
        if not self.terms or not other.terms:
            return Laurent()
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict = {}
        get = out.get
        for mb, cb in b.items():
            if not mb:
                for ma, ca in a.items():
                    out[ma] = get(ma, 0) + ca * cb
                continue
            for ma, ca in a.items():
                m = mono_mul(ma, mb)
                out[m] = get(m, 0) + ca * cb
        return Laurent(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Laurent":
        if not isinstance(k, int) or k < 0:
            raise ValueError("Laurent powers must be non-negative integers; use inverse_monomial")
        if len(self.terms) == 1:
            (m, c), = self.terms.items()
            return Laurent({mono_pow(m, k): _norm(Fraction(c) ** k)})
        result = Laurent.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def map_coefficients(self, f) -> "Laurent":
        return Laurent({m: f(c) for m, c in self.terms.items()})

    # calculus -------------------------------------------------------------
    def diff(self, name: str) -> "Laurent":
        """Partial derivative with respect to variable ``name``."""
        out: dict = {}
        get = out.get
        for mono, c in self.terms.items():
            for i, (atom, k) in enumerate(mono):
                da = _atom_derivative(atom, name)
                if not da.terms:
                    continue
                if k == 1:
                    rest = mono[:i] + mono[i + 1:]
                else:
                    rest = mono[:i] + ((atom, k - 1),) + mono[i + 1:]
                ck = c * k
                for dm, dc in da.terms.items():
                    m = mono_mul(rest, dm)
                    out[m] = get(m, 0) + ck * dc
        return Laurent(out)

    def subs(self, mapping: Mapping[str, object]) -> "Laurent":
        if not set(mapping) & self.free_symbols():
            return self
        return Laurent.from_expr(E.subs(self.to_expr(), mapping))


def _coerce(x) -> Laurent:
    if isinstance(x, Laurent):
        return x
    if isinstance(x, E.Expr):
        return Laurent.from_expr(x)
    return Laurent.constant(x)


_ATOM_TYPES = (E.Var, E.Param, E.Sin, E.Cos, E.Sinh, E.Cosh, E.TagS, E.TagC)


@lru_cache(maxsize=8192)
def normalize_atom(atom: E.Expr) -> E.Expr:
    """Rebuild a function atom with expanded arguments so equal atoms match."""
    if isinstance(atom, (E.Var, E.Param)):
        return atom
    children = tuple(Laurent.from_expr(c).to_expr() for c in atom.children())
    return atom.rebuild(children)


@lru_cache(maxsize=8192)
def _atom_symbols(atom: E.Expr) -> frozenset:
    return frozenset(atom.free_symbols())


@lru_cache(maxsize=16384)
def _atom_derivative(atom: E.Expr, name: str) -> Laurent:
    if isinstance(atom, E.Var):
        return Laurent.constant(1 if atom.name == name else 0)
    if name not in _atom_symbols(atom):
        return Laurent()
    return Laurent.from_expr(E.diff(atom, name))


def _from_expr(e: E.Expr, memo: dict) -> Laurent:
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, E.Const):
        out = Laurent.constant(e.value)
    elif isinstance(e, _ATOM_TYPES):
        out = Laurent.atom(normalize_atom(e))
    elif isinstance(e, E.Sum):
        out = Laurent()
        for t in e.terms:
            out = out + _from_expr(t, memo)
    elif isinstance(e, E.Product):
        out = Laurent.constant(1)
        for f in e.factors:
            out = out * _from_expr(f, memo)
    elif isinstance(e, E.IntPow):
        base = _from_expr(e.base, memo)
        if e.exp > 0:
            out = base ** e.exp
        elif len(base.terms) == 1:
            (m, c), = base.terms.items()
            out = Laurent({mono_pow(m, e.exp): Fraction(c) ** e.exp})
        elif not base.terms:
            raise ZeroDivisionError(f"negative power of an expression that expands to 0: {e}")
        else:
            out = Laurent.atom(base.to_expr(), e.exp)
    else:  # pragma: no cover
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = out
    return out


def lsum(items: Iterable[Laurent]) -> Laurent:
    out: dict = {}
    for item in items:
        for m, c in item.terms.items():
            out[m] = out.get(m, 0) + c
    return Laurent(out)
