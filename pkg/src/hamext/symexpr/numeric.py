"""Numeric evaluation, sampling and probabilistic zero testing."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .. import _kernels
from ..errors import PoleError, SamplingError, UnboundSymbolError
from . import expr as E
from .laurent import Laurent

__all__ = [
    "tagged_sin", "tagged_cos", "tagged_tan", "evaluate", "CompiledSum", "compile_laurent",
    "SampleWindow", "as_window", "draw_points", "ZeroTest", "zero_test",
    "is_zero_probabilistic", "to_laurent",
]


# ---------------------------------------------------------------------------
# tagged trigonometric functions


def _finish(out, scalar: bool):
    return float(out) if scalar else out


def tagged_sin(x, kappa):
    """S_kappa(x): sin(sqrt(k)x)/sqrt(k), x or sinh(sqrt(-k)x)/sqrt(-k) by sign of k."""
    scalar = np.ndim(x) == 0 and np.ndim(kappa) == 0
    x, k = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(kappa, dtype=float))
    r = np.sqrt(np.abs(k))
    safe = np.where(r == 0, 1.0, r)
    with np.errstate(all="ignore"):
        out = np.where(k > 0, np.sin(r * x) / safe, np.where(k < 0, np.sinh(r * x) / safe, x))
    return _finish(out, scalar)


def tagged_cos(x, kappa):
    """C_kappa(x): cos(sqrt(k)x), 1 or cosh(sqrt(-k)x) by sign of k."""
    scalar = np.ndim(x) == 0 and np.ndim(kappa) == 0
    x, k = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(kappa, dtype=float))
    r = np.sqrt(np.abs(k))
    with np.errstate(all="ignore"):
        out = np.where(k > 0, np.cos(r * x), np.where(k < 0, np.cosh(r * x), 1.0))
    return _finish(out, scalar)


def tagged_tan(x, kappa):
    return tagged_sin(x, kappa) / tagged_cos(x, kappa)


# ---------------------------------------------------------------------------
# tree evaluation


def evaluate(e: E.Expr, bindings: Mapping[str, object], *, strict: bool = True):
    """Evaluate ``e`` with every Var/Param bound by name.

    Bindings may be floats or equally-shaped arrays; the result has the same
    shape (a Python float for scalar input). With ``strict`` a negative
    power of zero raises :class:`PoleError`; otherwise it yields inf/nan.
    """
    arrays = any(np.ndim(v) > 0 for v in bindings.values())
    out = _eval(e, bindings, {}, strict)
    if arrays:
        return np.asarray(out, dtype=float)
    return float(out)


def _eval(e: E.Expr, b, memo: dict, strict: bool):
    hit = memo.get(e)
    if hit is not None:
        return hit
    if isinstance(e, E.Const):
        out = float(e.value)
    elif isinstance(e, (E.Var, E.Param)):
        try:
            out = b[e.name]
        except KeyError:
            raise UnboundSymbolError(e.name) from None
    elif isinstance(e, E.Sum):
        out = 0.0
        for t in e.terms:
            out = out + _eval(t, b, memo, strict)
    elif isinstance(e, E.Product):
        out = 1.0
        for f in e.factors:
            out = out * _eval(f, b, memo, strict)
    elif isinstance(e, E.IntPow):
        base = _eval(e.base, b, memo, strict)
        if e.exp < 0:
            if strict and np.any(np.asarray(base) == 0):
                raise PoleError(f"pole: {e.base} vanishes")
            with np.errstate(all="ignore"):
                out = np.power(np.asarray(base, dtype=float), float(e.exp))
        else:
            out = base ** e.exp
    elif isinstance(e, E.Sin):
        out = np.sin(_eval(e.arg, b, memo, strict))
    elif isinstance(e, E.Cos):
        out = np.cos(_eval(e.arg, b, memo, strict))
    elif isinstance(e, E.Sinh):
        out = np.sinh(_eval(e.arg, b, memo, strict))
    elif isinstance(e, E.Cosh):
        out = np.cosh(_eval(e.arg, b, memo, strict))
    elif isinstance(e, E.TagS):
        out = tagged_sin(_eval(e.arg, b, memo, strict), _eval(e.kappa, b, memo, strict))
    elif isinstance(e, E.TagC):
        out = tagged_cos(_eval(e.arg, b, memo, strict), _eval(e.kappa, b, memo, strict))
    else:  # pragma: no cover
        raise TypeError(f"unknown node {type(e).__name__}")
    memo[e] = out
    return out


# ---------------------------------------------------------------------------
# compiled monomial sums


class CompiledSum:
    """A Laurent polynomial flattened into CSR term tables for the kernels."""

    def __init__(self, poly: Laurent):
        atoms = sorted(poly.atoms(), key=lambda a: a.key)
        index = {a: i for i, a in enumerate(atoms)}
        ptr = [0]
        idx: list[int] = []
        exps: list[int] = []
        coefs: list[float] = []
        for mono, c in poly.terms.items():
            for a, k in mono:
                idx.append(index[a])
                exps.append(k)
            ptr.append(len(idx))
            coefs.append(float(c))
        self.atoms = tuple(atoms)
        self.ptr = np.asarray(ptr, dtype=np.int64)
        self.atom_idx = np.asarray(idx, dtype=np.int32)
        self.exps = np.asarray(exps, dtype=np.int32)
        self.coefs = np.asarray(coefs, dtype=np.float64)
        self.symbols = frozenset(poly.free_symbols())

    def __len__(self) -> int:
        return len(self.coefs)

    def atom_values(self, bindings: Mapping[str, np.ndarray], n: int) -> np.ndarray:
        vals = np.empty((n, max(len(self.atoms), 1)))
        with np.errstate(all="ignore"):
            for i, a in enumerate(self.atoms):
                vals[:, i] = evaluate(a, bindings, strict=False)
        return vals

    def evaluate(self, bindings: Mapping[str, object], kernels=None):
        """Return ``(values, magnitudes)`` over the sample points in ``bindings``.

        ``magnitudes`` holds the largest absolute monomial at each point.
        """
        k = kernels or _kernels
        arrays = {name: np.atleast_1d(np.asarray(v, dtype=float)) for name, v in bindings.items()}
        n = max((len(v) for v in arrays.values()), default=1)
        arrays = {name: np.broadcast_to(v, (n,)) for name, v in arrays.items()}
        missing = self.symbols - set(arrays)
        if missing:
            raise UnboundSymbolError(sorted(missing)[0])
        vals = np.ascontiguousarray(self.atom_values(arrays, n))
        return k.eval_terms(vals, self.ptr, self.atom_idx, self.exps, self.coefs)


def compile_laurent(poly: Laurent) -> CompiledSum:
    if poly._compiled is None:
        poly._compiled = CompiledSum(poly)
    return poly._compiled


def to_laurent(obj) -> Laurent:
    if isinstance(obj, Laurent):
        return obj
    if isinstance(obj, E.Expr):
        return Laurent.from_expr(obj)
    if hasattr(obj, "to_laurent"):
        return obj.to_laurent()
    return Laurent.constant(obj)


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SampleWindow:
    """Closed interval ``[lo, hi]`` minus open pole neighbourhoods."""

    lo: float
    hi: float
    poles: tuple[tuple[float, float], ...] = field(default=())

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"invalid window [{self.lo}, {self.hi}]")
        for center, radius in self.poles:
            if radius <= 0:
                raise ValueError("pole radius must be positive")

    def contains(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        ok = (x >= self.lo) & (x <= self.hi)
        for center, radius in self.poles:
            ok &= np.abs(x - center) >= radius
        return ok

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        out = np.empty(n)
        filled = 0
        for _ in range(1000):
            draw = rng.uniform(self.lo, self.hi, size=max(n - filled, 1) * 2)
            draw = draw[self.contains(draw)][: n - filled]
            out[filled:filled + len(draw)] = draw
            filled += len(draw)
            if filled == n:
                return out
        raise SamplingError(f"window [{self.lo}, {self.hi}] is almost entirely excluded by poles")


def as_window(w) -> SampleWindow:
    if isinstance(w, SampleWindow):
        return w
    lo, hi = w
    return SampleWindow(float(lo), float(hi))


def draw_points(symbols, windows: Mapping[str, object], n: int, rng: np.random.Generator,
                fixed: Mapping[str, float] | None = None) -> dict[str, np.ndarray]:
    fixed = fixed or {}
    out = {}
    for name in sorted(symbols):
        if name in fixed:
            out[name] = np.full(n, float(fixed[name]))
        elif name in windows:
            out[name] = as_window(windows[name]).sample(rng, n)
        else:
            raise UnboundSymbolError(name)
    return out


# ---------------------------------------------------------------------------
# zero testing


@dataclass(frozen=True)
class ZeroTest:
    """Outcome of a sampled zero test.

    ``max_ratio`` is the worst ``|value| / (1 + max |term|)`` over the points;
    the test passes when it does not exceed ``tol``.
    """

    passed: bool
    max_ratio: float
    points: int
    tol: float

    def __bool__(self) -> bool:
        return self.passed


def _rng(rng=None, seed=None) -> np.random.Generator:
    if rng is not None:
        return rng
    return np.random.default_rng(seed)


def zero_test(e, windows: Mapping[str, object], trials: int = 20, tol: float = 1e-9, *,
              rng: np.random.Generator | None = None, seed: int | None = None,
              fixed: Mapping[str, float] | None = None, retries: int = 20) -> ZeroTest:
    """Sample ``e`` at ``trials`` points and compare against ``tol``.

    Points where evaluation is not finite (pole hits) are redrawn; after
    ``retries`` rounds of redrawing a :class:`SamplingError` is raised.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    poly = to_laurent(e)
    if poly.is_zero():
        return ZeroTest(True, 0.0, trials, tol)
    compiled = compile_laurent(poly)
    gen = _rng(rng, seed)
    pts = draw_points(compiled.symbols, windows, trials, gen, fixed)
    values, mags = compiled.evaluate(pts)
    for _ in range(retries):
        bad = ~(np.isfinite(values) & np.isfinite(mags))
        if not bad.any():
            break
        nbad = int(bad.sum())
        redo = draw_points(compiled.symbols, windows, nbad, gen, fixed)
        v2, m2 = compiled.evaluate(redo)
        values[bad], mags[bad] = v2, m2
    else:
        if not np.all(np.isfinite(values) & np.isfinite(mags)):
            raise SamplingError("could not find finite sample points within the retry budget")
    ratio = np.abs(values) / (1.0 + mags)
    worst = float(ratio.max())
    return ZeroTest(bool(worst <= tol), worst, trials, tol)


def is_zero_probabilistic(e, windows: Mapping[str, object], trials: int = 20, tol: float = 1e-9,
                          **kwargs) -> bool:
    """True iff ``|e| <= tol * (1 + max |term|)`` at every sampled point."""
    return zero_test(e, windows, trials, tol, **kwargs).passed

