"""Momentum polynomials, the canonical Poisson bracket and X_L.

Sign convention (pinned by tests against the printed vector fields of the
oscillator and Calogero examples)::

    {f, g} = sum_i  df/dq_i * dg/dp_i  -  df/dp_i * dg/dq_i
    X_L(f) = {f, L}
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

import numpy as np

from .errors import ChartMismatchError, MomentumPowerError
from .symexpr import expr as E
from .symexpr.laurent import Laurent, _atom_symbols
from .symexpr.numeric import ZeroTest, compile_laurent, zero_test
from .symexpr.parser import parse
from .symexpr.printing import latex_name, to_latex, to_text

__all__ = [
    "CanonicalChart", "MomentumPoly", "poisson", "xl_apply", "xl_power", "degree",
    "equal_numeric", "numeric_difference",
]


@dataclass(frozen=True)
class CanonicalChart:
    """Ordered (coordinate, momentum) name pairs."""

    pairs: tuple[tuple[str, str], ...]

    def __post_init__(self):
        pairs = tuple((str(q), str(p)) for q, p in self.pairs)
        object.__setattr__(self, "pairs", pairs)
        names = [n for pair in pairs for n in pair]
        if len(set(names)) != len(names):
            raise ValueError(f"chart names must be pairwise distinct: {names}")

    @classmethod
    def of(cls, *pairs: tuple[str, str]) -> "CanonicalChart":
        return cls(tuple(pairs))

    @property
    def coordinates(self) -> tuple[str, ...]:
        return tuple(q for q, _ in self.pairs)

    @property
    def momenta(self) -> tuple[str, ...]:
        return tuple(p for _, p in self.pairs)

    @property
    def names(self) -> tuple[str, ...]:
        return self.coordinates + self.momenta

    def __len__(self) -> int:
        return len(self.pairs)

    def extend(self, coordinate: str, momentum: str) -> "CanonicalChart":
        return CanonicalChart(self.pairs + ((coordinate, momentum),))

    def contains(self, other: "CanonicalChart") -> bool:
        return set(other.pairs) <= set(self.pairs)


def _coerce_laurent(x) -> Laurent:
    if isinstance(x, Laurent):
        return x
    if isinstance(x, E.Expr):
        return Laurent.from_expr(x)
    return Laurent.constant(Fraction(x))


class MomentumPoly:
    """Polynomial in the chart momenta with coefficients in coordinates/parameters.

    Stored as one expanded :class:`Laurent` in which the momenta are plain
    atoms restricted to non-negative exponents. :meth:`coefficients` gives
    the ``{momentum multi-index: Expr}`` view.
    """

    __slots__ = ("chart", "poly", "_grouped")

    def __init__(self, poly: Laurent, chart: CanonicalChart, *, check: bool = True):
        self.chart = chart
        self.poly = poly
        self._grouped = None
        if check:
            self._validate()

    def _validate(self):
        momenta = set(self.chart.momenta)
        for mono in self.poly.terms:
            for atom, k in mono:
                if isinstance(atom, E.Var) and atom.name in momenta:
                    if k < 0:
                        raise MomentumPowerError(f"negative power of momentum {atom.name}")
                elif momenta & _atom_symbols(atom):
                    raise MomentumPowerError(f"momentum inside non-polynomial term {atom}")

    # construction --------------------------------------------------------
    @classmethod
    def from_expr(cls, e: E.Expr, chart: CanonicalChart) -> "MomentumPoly":
        return cls(Laurent.from_expr(e), chart)

    @classmethod
    def parse(cls, text: str, chart: CanonicalChart, parameters: Iterable[str] = ()) -> "MomentumPoly":
        return cls.from_expr(parse(text, parameters), chart)

    @classmethod
    def constant(cls, value, chart: CanonicalChart) -> "MomentumPoly":
        return cls(_coerce_laurent(value), chart, check=False)

    @classmethod
    def momentum(cls, name: str, chart: CanonicalChart) -> "MomentumPoly":
        if name not in chart.momenta:
            raise ValueError(f"{name!r} is not a momentum of the chart")
        return cls(Laurent.atom(E.Var(name)), chart, check=False)

    # views -----------------------------------------------------------------
    def to_laurent(self) -> Laurent:
        return self.poly

    def to_expr(self) -> E.Expr:
        return self.poly.to_expr()

    def grouped(self) -> dict[tuple[int, ...], Laurent]:
        """Split into ``{momentum exponents: coefficient Laurent}``."""
        if self._grouped is None:
            pos = {p: i for i, p in enumerate(self.chart.momenta)}
            groups: dict = {}
            for mono, c in self.poly.terms.items():
                idx = [0] * len(pos)
                rest = []
                for atom, k in mono:
                    i = pos.get(atom.name) if isinstance(atom, E.Var) else None
                    if i is None:
                        rest.append((atom, k))
                    else:
                        idx[i] = k
                groups.setdefault(tuple(idx), {})[tuple(rest)] = c
            self._grouped = {k: Laurent(v, _trusted=True) for k, v in groups.items()}
        return self._grouped

    def coefficients(self) -> dict[tuple[int, ...], E.Expr]:
        return {idx: c.to_expr() for idx, c in self.grouped().items()}

    def coefficient(self, idx: tuple[int, ...]) -> E.Expr:
        c = self.grouped().get(tuple(idx))
        return E.ZERO if c is None else c.to_expr()

    def degree(self) -> int:
        g = self.grouped()
        return max((sum(idx) for idx in g), default=-1)

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def __len__(self) -> int:
        return len(self.poly)

    def __eq__(self, other) -> bool:
        if isinstance(other, MomentumPoly):
            return self.chart == other.chart and self.poly == other.poly
        return NotImplemented

    __hash__ = None

    def __str__(self) -> str:
        return self.to_text()

    def _ordered_groups(self):
        # descending total momentum degree, then lexicographic exponents
        return sorted(self.grouped().items(), key=lambda kv: (-sum(kv[0]), tuple(-e for e in kv[0])))

    def _format(self, render, mono, sep, paren) -> str:
        parts = []
        for idx, coef in self._ordered_groups():
            c = coef.to_expr()
            m = mono(idx)
            if not m:
                term = render(c)
            elif c == E.ONE:
                term = m
            elif c == E.MINUS_ONE:
                term = "-" + m
            elif isinstance(c, E.Sum):
                term = paren(render(c)) + sep + m
            else:
                term = render(c) + sep + m
            if parts and term.startswith("-"):
                parts.append(" - " + term[1:])
            elif parts:
                parts.append(" + " + term)
            else:
                parts.append(term)
        return "".join(parts) or "0"

    def to_text(self) -> str:
        """Parseable text, grouped by momentum monomial."""
        momenta = self.chart.momenta

        def mono(idx):
            return "*".join(p if k == 1 else f"{p}^{k}" for p, k in zip(momenta, idx) if k)

        return self._format(to_text, mono, "*", lambda s: f"({s})")

    def to_latex(self) -> str:
        momenta = [latex_name(p) for p in self.chart.momenta]

        def mono(idx):
            return " ".join(p if k == 1 else f"{p}^{{{k}}}" for p, k in zip(momenta, idx) if k)

        return self._format(to_latex, mono, "\\,", lambda s: f"\\left({s}\\right)")

    def __repr__(self) -> str:
        return f"MomentumPoly({str(self)!r}, chart={list(self.chart.pairs)})"

    # arithmetic --------------------------------------------------------
    def _other(self, other) -> Laurent:
        if isinstance(other, MomentumPoly):
            if other.chart != self.chart:
                raise ChartMismatchError(f"charts differ: {self.chart.pairs} vs {other.chart.pairs}")
            return other.poly
        return _coerce_laurent(other)

    def _wrap(self, poly: Laurent, check: bool = False) -> "MomentumPoly":
        return MomentumPoly(poly, self.chart, check=check)

    def __add__(self, other):
        return self._wrap(self.poly + self._other(other), check=not isinstance(other, MomentumPoly))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.poly - self._other(other), check=not isinstance(other, MomentumPoly))

    def __rsub__(self, other):
        return self._wrap(self._other(other) - self.poly, check=True)

    def __neg__(self):
        return self._wrap(-self.poly)

    def __mul__(self, other):
        return self._wrap(self.poly * self._other(other), check=not isinstance(other, MomentumPoly))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        return self._wrap(self.poly ** k)

    def scale(self, c) -> "MomentumPoly":
        return self._wrap(self.poly.scale(c))

    def diff(self, name: str) -> "MomentumPoly":
        return self._wrap(self.poly.diff(name))

    def subs(self, mapping: Mapping[str, object]) -> "MomentumPoly":
        for name in mapping:
            if name in self.chart.names:
                raise ValueError("substituting chart variables is not supported; use Expr.subs")
        return self._wrap(self.poly.subs(mapping))

    def lift(self, chart: CanonicalChart) -> "MomentumPoly":
        """Reinterpret on a larger chart that contains this one."""
        if chart == self.chart:
            return self
        if not chart.contains(self.chart):
            raise ChartMismatchError(f"{chart.pairs} does not contain {self.chart.pairs}")
        return MomentumPoly(self.poly, chart, check=True)

    def free_symbols(self) -> set[str]:
        return self.poly.free_symbols()

    def evaluate(self, bindings: Mapping[str, object]):
        values, _ = compile_laurent(self.poly).evaluate(bindings)
        if all(np.ndim(v) == 0 for v in bindings.values()):
            return float(values[0])
        return values


def _check_same_chart(f: MomentumPoly, g: MomentumPoly, chart: CanonicalChart | None):
    chart = chart or f.chart
    if f.chart != chart or g.chart != chart:
        raise ChartMismatchError(
            f"poisson bracket needs a common chart: {f.chart.pairs} / {g.chart.pairs} / {chart.pairs}")
    return chart


def poisson(f: MomentumPoly, g: MomentumPoly, chart: CanonicalChart | None = None) -> MomentumPoly:
    """Canonical bracket ``sum df/dq dg/dp - df/dp dg/dq``."""
    chart = _check_same_chart(f, g, chart)
    acc = Laurent()
    for q, p in chart.pairs:
        fq, gp = f.poly.diff(q), g.poly.diff(p)
        if fq and gp:
            acc = acc + fq * gp
        fp, gq = f.poly.diff(p), g.poly.diff(q)
        if fp and gq:
            acc = acc - fp * gq
    return MomentumPoly(acc, chart, check=False)


def xl_apply(L: MomentumPoly, f: MomentumPoly, chart: CanonicalChart | None = None) -> MomentumPoly:
    """X_L(f) = {f, L}.

    ``L`` may live on a sub-chart of ``f``'s chart (as for the extension
    variables u, p_u); it is lifted, so X_L never differentiates the extra
    variables.
    """
    chart = chart or f.chart
    return poisson(f, L.lift(chart), chart)


def xl_power(L: MomentumPoly, f: MomentumPoly, k: int) -> MomentumPoly:
    """X_L applied ``k`` times."""
    for _ in range(k):
        f = xl_apply(L, f)
    return f


def degree(f: MomentumPoly) -> int:
    """Total momentum degree; -1 for the zero polynomial."""
    return f.degree()


def numeric_difference(f: MomentumPoly, g: MomentumPoly, system, trials: int = 50,
                       tol: float = 1e-9, *, seed: int | None = None, rng=None,
                       fixed: Mapping[str, float] | None = None) -> ZeroTest:
    if f.chart != g.chart:
        raise ChartMismatchError(f"charts differ: {f.chart.pairs} vs {g.chart.pairs}")
    return zero_test(f.poly - g.poly, system.sampling_windows(), trials, tol,
                     seed=seed, rng=rng, fixed=fixed)


def equal_numeric(f: MomentumPoly, g: MomentumPoly, system, trials: int = 50,
                  tol: float = 1e-9, **kwargs) -> bool:
    """True iff ``f - g`` passes the sampled zero test over the system windows."""
    return numeric_difference(f, g, system, trials, tol, **kwargs).passed
