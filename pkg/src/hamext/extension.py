"""(m, n)-extensions: generating-function iterates and first integrals.

Given ``L`` on a chart Q and a generating function ``G`` with
``X_L^2(G) = -2 (c L + L0) G``, this module builds

* ``G_n`` by the recursion ``G_{k+1} = X_L(G) G_k + G X_L(G_k) / k`` and by
  the binomial closed form,
* ``H_{m,n} = p_u^2/2 + (m/n)^2 (alpha(u) L + beta(u))`` on Q x T*R,
* ``K_{m,n} = (p_u + m/n^2 gamma(u) X_L)^m (G_n)`` by repeated operator
  application and by the P/D closed form.

Here ``c``/``L0`` stand for the rescaled constants c-tilde and L0-tilde.
Functions take a *system* object exposing ``chart``, ``L``, ``G``,
``c_tilde``, ``L0_tilde`` and ``sampling_windows()`` (see
:class:`hamext.systems.SystemDef`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

from .phasespace import CanonicalChart, MomentumPoly, xl_apply
from .symexpr import expr as E
from .symexpr.laurent import Laurent
from .symexpr.numeric import ZeroTest, zero_test

__all__ = [
    "ExtensionSpec", "TableOneFunctions", "table_one", "lambda_of", "cg_residual", "check_cg",
    "gn_recursive", "gn_sequence", "gn_closed", "extended_chart", "extended_hamiltonian",
    "first_integral_operator", "first_integral_pd", "p_and_d", "Construction", "construct",
]


@dataclass(frozen=True)
class ExtensionSpec:
    """Parameters selecting one (m, n)-extension.

    ``kappa`` is consumed only when ``c_tilde`` is non-zero, ``A`` only when
    it is zero.
    """

    m: int
    n: int
    c_tilde: E.Expr = E.ZERO
    L0_tilde: E.Expr = E.ZERO
    kappa: E.Expr = E.ZERO
    A: E.Expr = E.ONE
    u: str = "u"
    p_u: str = "p_u"

    def __post_init__(self):
        for name in ("m", "n"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        for name in ("c_tilde", "L0_tilde", "kappa", "A"):
            v = E.as_expr(getattr(self, name))
            if v.variables():
                raise ValueError(f"{name} must be constant, got {v}")
            object.__setattr__(self, name, v)

    @property
    def curved(self) -> bool:
        return self.c_tilde != E.ZERO

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.m, self.n)


@dataclass(frozen=True)
class TableOneFunctions:
    alpha_tilde: E.Expr
    beta_tilde: E.Expr
    gamma_tilde: E.Expr


def table_one(spec: ExtensionSpec) -> TableOneFunctions:
    """alpha, beta, gamma of the extension as functions of ``u``."""
    u = E.Var(spec.u)
    if not spec.curved:
        A = spec.A
        return TableOneFunctions(
            alpha_tilde=A,
            beta_tilde=E.mul(spec.L0_tilde, E.power(A, 2), E.power(u, 2)),
            gamma_tilde=E.neg(E.mul(A, u)),
        )
    cu = E.mul(spec.c_tilde, u)
    s = E.tag_s(cu, spec.kappa)
    c = E.tag_c(cu, spec.kappa)
    return TableOneFunctions(
        alpha_tilde=E.mul(spec.c_tilde, E.power(s, -2)),
        beta_tilde=E.ZERO,
        gamma_tilde=E.mul(c, E.power(s, -1)),
    )


def lambda_of(system, c_tilde=None, L0_tilde=None) -> MomentumPoly:
    """Lambda = -2 (c L + L0) on the system chart."""
    c = E.as_expr(system.c_tilde if c_tilde is None else c_tilde)
    l0 = E.as_expr(system.L0_tilde if L0_tilde is None else L0_tilde)
    cache = getattr(system, "_lambda_cache", None)
    key = (c, l0)
    if cache is not None and key in cache:
        return cache[key]
    lam = (system.L * Laurent.from_expr(c) + Laurent.from_expr(l0)).scale(-2)
    if cache is not None:
        cache[key] = lam
    return lam


def cg_residual(system, G: MomentumPoly, c_tilde=None, L0_tilde=None, *, L=None,
                trials: int = 20, tol: float = 1e-9, seed: int | None = 0, rng=None,
                fixed=None) -> ZeroTest:
    """Zero test of ``X_L^2(G) + 2 (c L + L0) G``."""
    L = system.L if L is None else L
    lam = lambda_of(_with_L(system, L), c_tilde, L0_tilde)
    xx = xl_apply(L, xl_apply(L, G))
    return zero_test((xx - lam * G).poly, system.sampling_windows(), trials, tol,
                     seed=seed, rng=rng, fixed=fixed)


def check_cg(system, G: MomentumPoly | None = None, c_tilde=None, L0_tilde=None, **kwargs) -> bool:
    """Whether ``G`` satisfies ``X_L^2(G) = -2 (c L + L0) G`` numerically."""
    G = system.G if G is None else G
    return cg_residual(system, G, c_tilde, L0_tilde, **kwargs).passed


class _with_L:
    # lambda_of view of a system with a substituted L (no caching)
    def __init__(self, system, L):
        self.L = L
        self.c_tilde = system.c_tilde
        self.L0_tilde = system.L0_tilde


def gn_sequence(G: MomentumPoly, L: MomentumPoly, n: int) -> list[MomentumPoly]:
    """``[G_1, ..., G_n]`` from the recursion."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xg = xl_apply(L, G)
    out = [G]
    for k in range(1, n):
        gk = out[-1]
        out.append(xg * gk + (G * xl_apply(L, gk)).scale(Fraction(1, k)))
    return out


def gn_recursive(G: MomentumPoly, L: MomentumPoly, n: int) -> MomentumPoly:
    return gn_sequence(G, L, n)[-1]


def gn_closed(G: MomentumPoly, L: MomentumPoly, Lambda: MomentumPoly, n: int) -> MomentumPoly:
    """sum_k C(n, 2k+1) Lambda^k G^(2k+1) X_L(G)^(n-2k-1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    xg = xl_apply(L, G)
    total = MomentumPoly.constant(0, G.chart)
    for k in range((n - 1) // 2 + 1):
        term = (Lambda ** k) * (G ** (2 * k + 1)) * (xg ** (n - 2 * k - 1))
        total = total + term.scale(comb(n, 2 * k + 1))
    return total


def extended_chart(chart: CanonicalChart, spec: ExtensionSpec) -> CanonicalChart:
    return chart.extend(spec.u, spec.p_u)


def extended_hamiltonian(system, spec: ExtensionSpec) -> MomentumPoly:
    """p_u^2/2 + (m/n)^2 (alpha L + beta)."""
    chart = extended_chart(system.chart, spec)
    t1 = table_one(spec)
    r2 = spec.ratio ** 2
    pu = MomentumPoly.momentum(spec.p_u, chart)
    L = system.L.lift(chart)
    return (pu * pu).scale(Fraction(1, 2)) + (L * Laurent.from_expr(t1.alpha_tilde)
                                             + Laurent.from_expr(t1.beta_tilde)).scale(r2)


def first_integral_operator(system, spec: ExtensionSpec, Gn: MomentumPoly) -> MomentumPoly:
    """Apply F -> p_u F + (m/n^2) gamma X_L(F) to ``Gn`` m times.

    X_L acts only on the original chart; u and p_u are passive.
    """
    chart = extended_chart(system.chart, spec)
    pu = MomentumPoly.momentum(spec.p_u, chart)
    weight = Laurent.from_expr(table_one(spec).gamma_tilde).scale(Fraction(spec.m, spec.n ** 2))
    F = Gn.lift(chart)
    for _ in range(spec.m):
        F = pu * F + xl_apply(system.L, F) * weight
    return F


def p_and_d(system, spec: ExtensionSpec) -> tuple[MomentumPoly, MomentumPoly]:
    """The P and D multipliers with ``K = P G_n + D X_L(G_n)``.

    The D sum runs to floor((m-1)/2); for m = 1 it reduces to gamma/n^2.
    """
    m, n = spec.m, spec.n
    chart = extended_chart(system.chart, spec)
    pu = MomentumPoly.momentum(spec.p_u, chart)
    g = Laurent.from_expr(table_one(spec).gamma_tilde).scale(Fraction(m, n))
    lam = lambda_of(system).lift(chart)
    P = MomentumPoly.constant(0, chart)
    for k in range(m // 2 + 1):
        P = P + (pu ** (m - 2 * k)) * (lam ** k) * (g ** (2 * k)).scale(comb(m, 2 * k))
    D = MomentumPoly.constant(0, chart)
    for k in range((m - 1) // 2 + 1):
        D = D + (pu ** (m - 2 * k - 1)) * (lam ** k) * (g ** (2 * k + 1)).scale(comb(m, 2 * k + 1))
    return P, D.scale(Fraction(1, n))


def first_integral_pd(system, spec: ExtensionSpec, Gn: MomentumPoly) -> MomentumPoly:
    chart = extended_chart(system.chart, spec)
    P, D = p_and_d(system, spec)
    G = Gn.lift(chart)
    return P * G + D * xl_apply(system.L, G)


@dataclass
class Construction:
    """Everything built for one (m, n) pair."""

    spec: ExtensionSpec
    G_n: MomentumPoly
    H: MomentumPoly
    K: MomentumPoly
    L: MomentumPoly = field(repr=False)

    @property
    def degree_bound(self) -> int:
        return self.spec.m + self.spec.n * (1 + self.G_degree) - 1

    G_degree: int = 0


def construct(system, spec: ExtensionSpec) -> Construction:
    """G_n (recursion), H_{m,n} and K_{m,n} (operator route)."""
    Gn = gn_recursive(system.G, system.L, spec.n)
    H = extended_hamiltonian(system, spec)
    K = first_integral_operator(system, spec, Gn)
    return Construction(spec=spec, G_n=Gn, H=H, K=K, L=system.L.lift(H.chart),
                        G_degree=system.G.degree())
