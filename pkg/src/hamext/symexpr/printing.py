"""Plain-text and LaTeX printers.

The plain printer emits the parser's grammar, so ``parse(to_text(e))``
rebuilds ``e`` (given the same parameter names).
"""
from __future__ import annotations

import re
from fractions import Fraction

from . import expr as E

__all__ = ["to_text", "to_latex", "latex_name"]

_FUNC_TEXT = {E.Sin: "sin", E.Cos: "cos", E.Sinh: "sinh", E.Cosh: "cosh"}
_TAG_TEXT = {E.TagS: "Sk", E.TagC: "Ck"}


def _frac_text(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def _ordered_terms(s: E.Sum) -> list[E.Expr]:
    # constants read better at the end
    return [t for t in s.terms if not t.is_const()] + [t for t in s.terms if t.is_const()]


def to_text(e: E.Expr) -> str:
    if isinstance(e, E.Const):
        return _frac_text(e.value)
    if isinstance(e, (E.Var, E.Param)):
        return e.name
    if isinstance(e, E.Sum):
        terms = _ordered_terms(e)
        out = [to_text(terms[0])]
        for t in terms[1:]:
            if E._is_negative(t):
                out.append(" - " + _factor_text(E.neg(t)))
            else:
                out.append(" + " + to_text(t))
        return "".join(out)
    if isinstance(e, E.Product):
        return _product_text(e)
    if isinstance(e, E.IntPow):
        if e.exp < 0:
            return "1/" + _pow_text(e.base, -e.exp)
        return _pow_text(e.base, e.exp)
    if type(e) in _FUNC_TEXT:
        return f"{_FUNC_TEXT[type(e)]}({to_text(e.arg)})"
    if type(e) in _TAG_TEXT:
        return f"{_TAG_TEXT[type(e)]}({to_text(e.arg)}, {to_text(e.kappa)})"
    raise TypeError(f"cannot print {type(e).__name__}")


def _base_text(b: E.Expr) -> str:
    if isinstance(b, (E.Sum, E.Product)) or (isinstance(b, E.Const) and (b.value < 0 or b.value.denominator != 1)):
        return f"({to_text(b)})"
    return to_text(b)


def _pow_text(base: E.Expr, exp: int) -> str:
    if exp == 1:
        return _base_text(base)
    return f"{_base_text(base)}^{exp}"


def _factor_text(f: E.Expr) -> str:
    if isinstance(f, E.Sum):
        return f"({to_text(f)})"
    if isinstance(f, E.IntPow):
        return _pow_text(f.base, f.exp)
    return to_text(f)


def _split_product(p: E.Product):
    coef = Fraction(1)
    num, den = [], []
    for f in p.factors:
        if isinstance(f, E.Const):
            coef *= f.value
        elif isinstance(f, E.IntPow) and f.exp < 0:
            den.append((f.base, -f.exp))
        else:
            num.append(f)
    return coef, num, den


def _product_text(p: E.Product) -> str:
    coef, num, den = _split_product(p)
    sign = "-" if coef < 0 else ""
    coef = abs(coef)
    den_strs = [_pow_text(b, k) for b, k in den]
    if num:
        head = [] if coef == 1 else [_frac_text(coef)]
        body = "*".join(head + [_factor_text(f) for f in num])
    else:
        body = str(coef.numerator)
        if coef.denominator != 1:
            den_strs.insert(0, str(coef.denominator))
    if den_strs:
        body += "/" + (den_strs[0] if len(den_strs) == 1 else "(" + "*".join(den_strs) + ")")
    return sign + body


# ---------------------------------------------------------------------------
# LaTeX

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta",
    "iota", "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau",
    "upsilon", "phi", "chi", "psi", "omega", "Gamma", "Delta", "Theta",
    "Lambda", "Xi", "Pi", "Sigma", "Phi", "Psi", "Omega",
}
_NAME = re.compile(r"^([A-Za-z]+?)(\d*)$")


def latex_name(name: str) -> str:
    """``omega -> \\omega``, ``xi1 -> \\xi_{1}``, ``p_xi2 -> p_{\\xi_{2}}``."""
    if "_" in name:
        head, _, tail = name.partition("_")
        return f"{latex_name(head)}_{{{latex_name(tail)}}}"
    m = _NAME.match(name)
    if m:
        stem, digits = m.groups()
        stem = "\\" + stem if stem in _GREEK else stem
        return f"{stem}_{{{digits}}}" if digits else stem
    return name


_FUNC_LATEX = {E.Sin: "\\sin", E.Cos: "\\cos", E.Sinh: "\\sinh", E.Cosh: "\\cosh"}
_TAG_LATEX = {E.TagS: "S", E.TagC: "C"}


def _frac_latex(v: Fraction) -> str:
    if v.denominator == 1:
        return str(v.numerator)
    sign = "-" if v < 0 else ""
    return f"{sign}\\frac{{{abs(v.numerator)}}}{{{v.denominator}}}"


def to_latex(e: E.Expr) -> str:
    if isinstance(e, E.Const):
        return _frac_latex(e.value)
    if isinstance(e, (E.Var, E.Param)):
        return latex_name(e.name)
    if isinstance(e, E.Sum):
        terms = _ordered_terms(e)
        out = [to_latex(terms[0])]
        for t in terms[1:]:
            if E._is_negative(t):
                n = E.neg(t)
                out.append(" - " + (f"\\left({to_latex(n)}\\right)" if isinstance(n, E.Sum) else to_latex(n)))
            else:
                out.append(" + " + to_latex(t))
        return "".join(out)
    if isinstance(e, E.Product):
        return _product_latex(e)
    if isinstance(e, E.IntPow):
        if e.exp < 0:
            return f"\\frac{{1}}{{{_pow_latex(e.base, -e.exp)}}}"
        return _pow_latex(e.base, e.exp)
    if type(e) in _FUNC_LATEX:
        return f"{_FUNC_LATEX[type(e)]}\\left({to_latex(e.arg)}\\right)"
    if type(e) in _TAG_LATEX:
        return f"{_TAG_LATEX[type(e)]}_{{{to_latex(e.kappa)}}}\\left({to_latex(e.arg)}\\right)"
    raise TypeError(f"cannot print {type(e).__name__}")


def _pow_latex(base: E.Expr, exp: int) -> str:
    if type(base) in _FUNC_LATEX and exp != 1:
        return f"{_FUNC_LATEX[type(base)]}^{{{exp}}}\\left({to_latex(base.arg)}\\right)"
    if type(base) in _TAG_LATEX and exp != 1:
        return (f"{_TAG_LATEX[type(base)]}_{{{to_latex(base.kappa)}}}^{{{exp}}}"
                f"\\left({to_latex(base.arg)}\\right)")
    if isinstance(base, (E.Sum, E.Product)):
        b = f"\\left({to_latex(base)}\\right)"
    else:
        b = to_latex(base)
    return b if exp == 1 else f"{b}^{{{exp}}}"


def _product_latex(p: E.Product) -> str:
    coef, num, den = _split_product(p)
    sign = "-" if coef < 0 else ""
    coef = abs(coef)

    def fac(f):
        if isinstance(f, E.Sum):
            return f"\\left({to_latex(f)}\\right)"
        if isinstance(f, E.IntPow):
            return _pow_latex(f.base, f.exp)
        return to_latex(f)

    num_s = " ".join(fac(f) for f in num)
    den_s = " ".join(_pow_latex(b, k) for b, k in den)
    if den or coef.denominator != 1:
        top = " ".join(x for x in (str(coef.numerator) if coef.numerator != 1 or not num else "", num_s) if x)
        bottom = " ".join(x for x in (str(coef.denominator) if coef.denominator != 1 else "", den_s) if x)
        return f"{sign}\\frac{{{top}}}{{{bottom}}}"
    head = "" if coef == 1 else str(coef.numerator) + " "
    return sign + head + num_s
