import json
import math

import numpy as np
import pytest

from hamext.extension import construct
from hamext.phasespace import CanonicalChart, MomentumPoly
from hamext.verify import (bracket_residual, conservation_drift, fd_bracket_oracle, integrate)

QP = CanonicalChart.of(("q", "p"))


def test_bracket_residual_examples(osc, cal):
    c = construct(osc, osc.spec(1, 1))
    ok, worst = bracket_residual(c.H, c.K, osc)
    assert ok and worst < 1e-12
    c = construct(cal, cal.spec(2, 3))
    ok, _ = bracket_residual(c.H, cal.fixture("K23"), cal)
    assert ok
    ok, worst = bracket_residual(c.H, MomentumPoly.momentum("p_u", c.H.chart), cal)
    assert not ok and worst > 1e-3


def test_fd_oracle_trivial():
    q, p = MomentumPoly.parse("q", QP), MomentumPoly.parse("p", QP)
    assert fd_bracket_oracle(q, p, {"q": 0.3, "p": -1.1}) == pytest.approx(1.0, abs=1e-8)
    f, g = MomentumPoly.parse("q^2", QP), MomentumPoly.parse("p^2", QP)
    assert fd_bracket_oracle(f, g, {"q": 1.0, "p": 1.0}) == pytest.approx(4.0, rel=1e-8)


def test_fd_oracle_matches_symbolic(osc):
    c = construct(osc, osc.spec(1, 2))
    rng = np.random.default_rng(0)
    for _ in range(10):
        pt = {k: rng.uniform(-1.5, 1.5) for k in ("x", "p_x", "u", "p_u")}
        pt["omega"] = rng.uniform(0.5, 2)
        fd, scale = fd_bracket_oracle(c.H, c.K, pt, 1e-5, with_scale=True)
        assert abs(fd) <= 1e-6 * (1 + scale)


def test_free_particle():
    H = MomentumPoly.parse("1/2*p^2", QP)
    run = integrate(H, {"q": 0.0, "p": 1.0}, 1.0, 0.01)
    assert run.final()["q"] == pytest.approx(1.0, abs=1e-12)
    assert not run.truncated and run.half.steps == 200


def test_harmonic_period():
    H = MomentumPoly.parse("1/2*p^2 + 1/2*q^2", QP)
    run = integrate(H, {"q": 1.0, "p": 0.0}, 2 * math.pi, 2 * math.pi / 2000)
    end = run.final()
    assert end["q"] == pytest.approx(1.0, abs=1e-9) and end["p"] == pytest.approx(0.0, abs=1e-9)


def test_generic_path_matches_kernel():
    # sin(q*omega) has a parameter inside the argument: no linear atom program
    H = MomentumPoly.parse("1/2*p^2 - cos(omega*q)", QP, ["omega"])
    Hk = MomentumPoly.parse("1/2*p^2 - cos(2*q)", QP)
    a = integrate(H, {"q": 0.4, "p": 0.1, "omega": 2.0}, 1.0, 0.01, halving=False)
    b = integrate(Hk, {"q": 0.4, "p": 0.1}, 1.0, 0.01, halving=False)
    assert np.allclose(a.states, b.states, atol=1e-13)


def test_truncation_flag(cal):
    c = construct(cal, cal.spec(1, 1))
    start = {"phi": 0.05, "p_phi": -3.0, "u": 1.0, "p_u": 0.0, "a": 0.0}
    run = integrate(c.H, start, 5.0, 1e-3, bounds=cal.integration_bounds())
    assert run.truncated and run.times[-1] < 5.0


def test_drift_report(osc, cal):
    c = construct(cal, cal.spec(2, 3))
    start = {"phi": 1.1, "p_phi": 0.3, "u": 1.5, "p_u": 0.2, "a": 1.0}
    rep = conservation_drift(c.H, {"H": c.H, "L": c.L, "K": c.K,
                                   "p_u": MomentumPoly.momentum("p_u", c.H.chart)},
                             start, 10.0, 1e-3, bounds=cal.integration_bounds())
    assert rep["H"].drift < 1e-6 and rep["K"].conserved
    assert not rep["p_u"].conserved and rep["p_u"].drift > 0.1
    assert not rep.all_conserved
    d = json.loads(rep.to_json())
    assert d["schema"] == 1 and {"name", "drift", "conserved"} <= set(d["integrals"][0])
    assert d["t_end"] == 10.0 and d["dt"] == 1e-3 and d["truncated"] is False


def test_integrate_rejects_bad_dt():
    H = MomentumPoly.parse("1/2*p^2", QP)
    with pytest.raises(ValueError):
        integrate(H, {"q": 0.0, "p": 1.0}, 1.0, 0.0)
    with pytest.raises(KeyError):
        integrate(H, {"q": 0.0}, 1.0, 0.1)
