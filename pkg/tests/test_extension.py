from fractions import Fraction

import pytest

from hamext.extension import (ExtensionSpec, check_cg, construct, extended_hamiltonian,
                              first_integral_operator, first_integral_pd, gn_closed,
                              gn_recursive, gn_sequence, lambda_of, p_and_d, table_one)
from hamext.phasespace import MomentumPoly, equal_numeric, poisson, xl_apply
from hamext.symexpr import diff, is_zero_probabilistic, parse
from hamext.symexpr import expr as E


def test_spec_validation():
    with pytest.raises(ValueError):
        ExtensionSpec(0, 1)
    with pytest.raises(ValueError):
        ExtensionSpec(1, 1, c_tilde=parse("x"))
    s = ExtensionSpec(2, 3, c_tilde=1)
    assert s.curved and s.ratio == Fraction(2, 3)


@pytest.mark.parametrize("spec", [
    ExtensionSpec(1, 1, 0, parse("omega^2", ["omega"])),
    ExtensionSpec(1, 1, 0, parse("omega^2", ["omega"]), A=3),
    ExtensionSpec(1, 1, 1, 0, kappa=parse("kappa", ["kappa"])),
    ExtensionSpec(1, 1, 2, 0, kappa=-1),
])
def test_table_one_relations(spec):
    t = table_one(spec)
    w = {"u": (0.5, 1.2), "omega": (0.5, 2), "kappa": (-1, 1)}
    assert is_zero_probabilistic(t.alpha_tilde + diff(t.gamma_tilde, "u"), w, tol=1e-12)
    assert is_zero_probabilistic(t.beta_tilde - spec.L0_tilde * t.gamma_tilde ** 2, w, tol=1e-12)


def test_lambda_examples(osc, cal):
    assert lambda_of(osc) == MomentumPoly.parse("-2*omega^2", osc.chart, ["omega"])
    assert lambda_of(cal) == cal.L.scale(-2)
    assert lambda_of(osc, 0, 0).is_zero()


def test_cg_examples(osc, cal, sph):
    assert check_cg(osc)
    assert not check_cg(osc, L0_tilde=parse("2*omega^2", ["omega"]))
    assert check_cg(cal)
    assert not check_cg(cal, c_tilde=2)
    assert check_cg(sph)


def test_gn_examples(osc, cal, sph):
    assert gn_recursive(osc.G, osc.L, 1) == osc.G
    assert gn_recursive(osc.G, osc.L, 2) == MomentumPoly.parse("2*x*p_x", osc.chart)
    assert equal_numeric(gn_recursive(cal.G, cal.L, 3), cal.fixture("G3"), cal)
    assert equal_numeric(gn_recursive(sph.G, sph.L, 2), sph.fixture("G2"), sph)


def test_gn_closed_oscillator():
    from hamext.systems import oscillator
    s = oscillator()
    g5 = gn_closed(s.G, s.L, lambda_of(s), 5)
    assert g5 == MomentumPoly.parse("5*x*p_x^4 - 20*omega^2*x^3*p_x^2 + 4*omega^4*x^5",
                                    s.chart, ["omega"])
    assert gn_closed(s.G, s.L, lambda_of(s), 1) == s.G


def test_gn_routes_agree(builtins):
    for s in builtins:
        assert equal_numeric(gn_recursive(s.G, s.L, 4), gn_closed(s.G, s.L, lambda_of(s), 4), s)


def test_gn_sequence_eigen_relation(cal):
    lam = lambda_of(cal)
    for n, g in enumerate(gn_sequence(cal.G, cal.L, 4), start=1):
        lhs = xl_apply(cal.L, xl_apply(cal.L, g))
        assert equal_numeric(lhs, (lam * g).scale(n * n), cal)


def test_extended_hamiltonian_examples(osc, cal):
    for m, n in [(1, 1), (2, 3), (3, 2)]:
        H = extended_hamiltonian(osc, osc.spec(m, n))
        r = Fraction(m, n) ** 2
        ref = MomentumPoly.parse(
            f"1/2*(p_u^2 + {r}*p_x^2) + omega^2*{r}*(x^2 + u^2)", H.chart, ["omega"])
        assert H == ref
    H = extended_hamiltonian(cal, cal.spec(2, 3))
    ref = MomentumPoly.parse("1/2*p_u^2 + 4/(9*u^2)*(1/2*p_phi^2 + a/sin(phi)^2)", H.chart, ["a"])
    assert H == ref


def test_flat_free_extension(osc):
    s = ExtensionSpec(1, 1, 0, 0)
    H = extended_hamiltonian(osc, s)
    assert H == MomentumPoly.parse("1/2*p_u^2", H.chart) + osc.L.lift(H.chart)


def test_operator_examples(osc):
    c11 = construct(osc, osc.spec(1, 1))
    assert c11.K == MomentumPoly.parse("x*p_u - u*p_x", c11.K.chart)
    c12 = construct(osc, osc.spec(1, 2))
    assert c12.K == MomentumPoly.parse("2*x*p_x*p_u - u*(1/2*p_x^2 - omega^2*x^2)",
                                       c12.K.chart, ["omega"])


def test_p_and_d_small_m(osc):
    spec = osc.spec(1, 3)
    P, D = p_and_d(osc, spec)
    gamma = table_one(spec).gamma_tilde
    assert P == MomentumPoly.momentum("p_u", P.chart)
    assert D == MomentumPoly.from_expr(E.mul(Fraction(1, 9), gamma), P.chart)


@pytest.mark.parametrize("kappa", [-1.0, 0.0, 1.0])
def test_routes_agree_curved(cal, sph, kappa):
    for s in (cal.with_kappa(kappa), sph.with_kappa(kappa)):
        for m, n in [(2, 1), (3, 2)]:
            spec = s.spec(m, n)
            gn = gn_recursive(s.G, s.L, n)
            assert equal_numeric(first_integral_operator(s, spec, gn),
                                 first_integral_pd(s, spec, gn), s)


def test_first_integral_commutes(sph):
    c = construct(sph, sph.spec(2, 2))
    assert equal_numeric(poisson(c.H, c.K), MomentumPoly.constant(0, c.H.chart), sph, tol=1e-8)
    assert equal_numeric(poisson(c.H, c.L), MomentumPoly.constant(0, c.H.chart), sph, tol=1e-8)


def test_degree_bound(builtins):
    for s in builtins:
        for m, n in [(1, 2), (3, 1), (2, 3)]:
            c = construct(s, s.spec(m, n))
            assert c.K.degree() <= c.degree_bound


def test_m_extension_compatibility(cal):
    # n = 1 gives 1/2 p_u^2 + m^2 c/S_k^2(c u) L
    H = extended_hamiltonian(cal, cal.spec(3, 1, kappa=1))
    ref = MomentumPoly.parse("1/2*p_u^2 + 9/Sk(u, 1)^2*(1/2*p_phi^2 + a/sin(phi)^2)",
                             H.chart, ["a"])
    assert H == ref
