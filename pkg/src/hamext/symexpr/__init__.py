"""Symbolic expression core: trees, parsing, calculus, numerics."""
from .expr import (
    Const, Cos, Cosh, Expr, IntPow, Param, Product, Sin, Sinh, Sum, TagC, TagS, Var,
    add, as_expr, const, cos, cosh, diff, div, mul, neg, param, power, simplify, sin, sinh,
    sub, subs, tag_c, tag_s, tag_t, var,
)
from .laurent import Laurent
from .numeric import (
    CompiledSum, SampleWindow, ZeroTest, evaluate, is_zero_probabilistic, tagged_cos,
    tagged_sin, tagged_tan, zero_test,
)
from .parser import parse
from .printing import to_latex, to_text

__all__ = [
    "Expr", "Const", "Param", "Var", "Sum", "Product", "IntPow", "Sin", "Cos", "Sinh",
    "Cosh", "TagS", "TagC", "add", "as_expr", "const", "cos", "cosh", "diff", "div", "mul",
    "neg", "param", "power", "simplify", "sin", "sinh", "sub", "subs", "tag_c", "tag_s",
    "tag_t", "var", "Laurent", "CompiledSum", "SampleWindow", "ZeroTest", "evaluate",
    "is_zero_probabilistic", "tagged_cos", "tagged_sin", "tagged_tan", "zero_test", "parse",
    "to_latex", "to_text",
]
