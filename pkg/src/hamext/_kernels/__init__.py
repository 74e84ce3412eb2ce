"""Hot numeric kernels with a compiled backend and a pure-Python fallback.

The Cython extension ``_ckernels`` is used when it was built; otherwise, or
when the environment variable ``HAMEXT_PURE_PYTHON`` is set to a non-empty
value other than ``0``, the numpy implementation in ``_pykernels`` is used.
``BACKEND`` names the active choice.
"""
import os

from . import _pykernels

_force_python = os.environ.get("HAMEXT_PURE_PYTHON", "") not in ("", "0")

if _force_python:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

eval_terms = _impl.eval_terms
eval_atoms = _impl.eval_atoms
rk4 = _impl.rk4

from ._pykernels import (  # noqa: E402
    ATOM_COS, ATOM_COSH, ATOM_ID, ATOM_SIN, ATOM_SINH, ATOM_TAGC, ATOM_TAGS,
)


def implementations() -> dict:
    """Every importable backend, keyed by name (for tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
