import json
import math

import numpy as np
import pytest

from hamext.errors import SystemConfigError
from hamext.extension import check_cg, construct, gn_recursive
from hamext.phasespace import MomentumPoly, equal_numeric, numeric_difference
from hamext.systems import (calogero, get_system, load_system, system_from_config,
                            system_to_config, three_sphere, three_sphere_geodesic)


def _computed(system, name):
    fx = system.fixtures[name]
    if fx.kind == "G":
        return gn_recursive(system.G, system.L, fx.index[0])
    return construct(system, system.spec(*fx.index)).K


def test_every_fixture_matches(builtins):
    for s in builtins:
        assert check_cg(s)
        for name in s.fixtures:
            res = numeric_difference(_computed(s, name), s.fixture(name), s, 50, 1e-9, seed=7)
            assert res.passed, (s.name, name, res.max_ratio)


@pytest.mark.parametrize("sysname, name", [("calogero", "G4"), ("sphere3", "K12")])
def test_verbatim_misprints_are_detected(sysname, name):
    s = get_system(sysname)
    fx = s.fixtures[name]
    assert fx.printed and fx.note
    got = _computed(s, name)
    assert not equal_numeric(got, s.fixture(name, printed=True), s, seed=7)


def test_calogero_g4_misprint_is_one_sign():
    s = calogero()
    diff = s.fixture("G4") - s.fixture("G4", printed=True)
    ref = MomentumPoly.parse("16*a*cos(phi)^3/sin(phi)*p_phi", s.chart, ["a"])
    assert diff == ref


def test_sphere_k12_misprint_is_one_coefficient():
    s = three_sphere()
    diff = s.fixture("K12") - s.fixture("K12", printed=True)
    ref = MomentumPoly.parse("sin(2*eta)*sin(xi2)^2*p_u*p_eta", diff.chart)
    assert diff == ref


@pytest.mark.parametrize("kappa", [-1.0, 1.0])
def test_sphere_k12_tagged_prefactor(kappa):
    s = three_sphere(kappa)
    assert equal_numeric(_computed(s, "K12"), s.fixture("K12"), s)


def test_oscillator_rescaling_equivalence(osc):
    # H_{m,n}(x, p_x, u, p_u) = lam^2 H0(x, p_x, lam u, p_u/lam), lam = m/n
    rng = np.random.default_rng(1)
    h0 = MomentumPoly.parse("1/2*p_y^2 + 1/2*p_x^2 + omega^2*x^2 + omega^2*y^2/lam^2",
                            osc.chart.extend("y", "p_y"), ["omega", "lam"])
    for m, n in [(1, 2), (3, 2), (2, 5)]:
        lam = m / n
        H = construct(osc, osc.spec(m, n)).H
        for _ in range(20):
            x, px, u, pu, w = rng.uniform(-2, 2, 5)
            a = H.evaluate({"x": x, "p_x": px, "u": u, "p_u": pu, "omega": w})
            b = h0.evaluate({"x": x, "p_x": px, "y": lam * u, "p_y": pu / lam, "omega": w, "lam": lam})
            assert a == pytest.approx(lam ** 2 * b, rel=1e-12)


def test_calogero_psi_form(cal):
    # kappa = 0, phi = lam psi: H = 1/2 p_u^2 + (1/u^2)(1/2 p_psi^2 + lam^2 a / sin^2(lam psi))
    rng = np.random.default_rng(2)
    for m, n in [(2, 3), (3, 1)]:
        lam = m / n
        H = construct(cal, cal.spec(m, n)).H
        for _ in range(20):
            psi = rng.uniform(0.3, 2.8) / lam
            ppsi, u, pu, a = rng.uniform(-2, 2), rng.uniform(0.5, 3), rng.uniform(-2, 2), rng.uniform(0.5, 2)
            got = H.evaluate({"phi": lam * psi, "p_phi": ppsi / lam, "u": u, "p_u": pu, "a": a})
            ref = 0.5 * pu ** 2 + (0.5 * ppsi ** 2 + lam ** 2 * a / math.sin(lam * psi) ** 2) / u ** 2
            assert got == pytest.approx(ref, rel=1e-12)


def test_sphere_complete_solution():
    s = three_sphere_geodesic()
    rng = np.random.default_rng(5)
    for _ in range(5):
        a = dict(zip(("a1", "a2", "a3", "a4"), rng.uniform(-2, 2, 4)))
        assert check_cg(s, fixed=a)


def test_u_window_avoids_tagged_poles():
    s = calogero(4.0)
    w = s.sampling_windows()["u"]
    pts = w.sample(np.random.default_rng(0), 500)
    assert np.all(np.abs(np.sin(2 * pts)) > 0.1)


# config ----------------------------------------------------------------------

OSC_CFG = {
    "name": "osc-file",
    "coordinates": [["x", "p_x"]],
    "L": "1/2*p_x^2 + omega^2*x^2",
    "G": "x",
    "c_tilde": 0,
    "L0_tilde": "omega^2",
    "parameters": {"omega": [0.5, 2]},
    "windows": {"x": [-2, 2]},
    "u_window": [-2, 2],
}


def test_config_roundtrip_json(tmp_path, osc):
    p = tmp_path / "osc.json"
    p.write_text(json.dumps(OSC_CFG))
    s = load_system(p)
    assert equal_numeric(s.L, osc.L, osc) and equal_numeric(s.G, osc.G, osc)
    assert construct(s, s.spec(3, 2)).K == construct(osc, osc.spec(3, 2)).K


def test_config_roundtrip_toml(tmp_path, osc):
    p = tmp_path / "osc.toml"
    p.write_text('''
name = "osc-toml"
coordinates = [["x", "p_x"]]
L = "1/2*p_x^2 + omega^2*x^2"
G = "x"
c_tilde = 0
L0_tilde = "omega^2"
u_window = [-2, 2]
[parameters]
omega = [0.5, 2]
[windows]
x = [-2, 2]
''')
    s = load_system(p)
    assert s.L == osc.L and s.G == osc.G


def test_system_to_config_roundtrip(tmp_path, cal):
    p = tmp_path / "cal.json"
    p.write_text(json.dumps(system_to_config(cal)))
    s = load_system(p)
    assert s.L == cal.L and s.G == cal.G and s.c_tilde == cal.c_tilde


def test_config_cg_violation():
    cfg = dict(OSC_CFG, L0_tilde="2*omega^2")
    with pytest.raises(SystemConfigError, match="CG condition violated"):
        system_from_config(cfg)


@pytest.mark.parametrize("patch, match", [
    ({"coordinates": []}, "schema"),
    ({"L": "1/2*p_x^2 +"}, "L"),
    ({"windows": {}}, "missing sampling window"),
    ({"G": "x*z"}, "undeclared"),
    ({"c_tilde": "x"}, "constant"),
    ({"poles": {"x": [0]}, "pole_radius": 5}, "excluded"),
    ({"poles": {"y": [0]}}, "unknown variable"),
    ({"extra": 1}, "schema"),
])
def test_config_errors(patch, match):
    with pytest.raises(SystemConfigError, match=match):
        system_from_config({**OSC_CFG, **patch})


def test_unknown_builtin():
    with pytest.raises(SystemConfigError):
        get_system("torus")
