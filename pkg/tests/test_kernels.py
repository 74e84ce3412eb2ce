import numpy as np
import pytest

from hamext import _kernels
from hamext._kernels import _pykernels
from hamext.extension import construct
from hamext.symexpr import parse
from hamext.symexpr.laurent import Laurent
from hamext.symexpr.numeric import compile_laurent
from hamext.verify import integrate

BACKENDS = [_pykernels]
if _kernels.BACKEND == "cython":
    from hamext._kernels import _ckernels
    BACKENDS.append(_ckernels)


def test_backend_selected():
    assert _kernels.BACKEND in ("cython", "python")
    assert "python" in _kernels.implementations()


@pytest.mark.parametrize("k", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_eval_terms_parity(k):
    poly = Laurent.from_expr(parse("3*x^2*y^-1 - sin(x)^3 + 1/2*Sk(y, kappa)*x + 7", ["kappa"]))
    cs = compile_laurent(poly)
    rng = np.random.default_rng(0)
    b = {"x": rng.uniform(-2, 2, 50), "y": rng.uniform(0.5, 2, 50), "kappa": rng.uniform(-2, 2, 50)}
    ref_v, ref_m = cs.evaluate(b, kernels=_pykernels)
    v, m = cs.evaluate(b, kernels=k)
    assert np.allclose(v, ref_v, rtol=1e-13) and np.allclose(m, ref_m, rtol=1e-13)


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled backend not built")
def test_rk4_parity(sph):
    c = construct(sph, sph.spec(2, 3))
    start = sph.default_start(3)
    a = integrate(c.H, start, 0.5, 1e-3, kernels=_pykernels, halving=False)
    b = integrate(c.H, start, 0.5, 1e-3, kernels=BACKENDS[1], halving=False)
    assert a.steps == b.steps
    assert np.allclose(a.states, b.states, rtol=1e-12, atol=1e-12)


def test_pure_python_env(monkeypatch):
    import importlib
    monkeypatch.setenv("HAMEXT_PURE_PYTHON", "1")
    mod = importlib.reload(_kernels)
    try:
        assert mod.BACKEND == "python"
    finally:
        monkeypatch.delenv("HAMEXT_PURE_PYTHON")
        importlib.reload(_kernels)
