"""Numerical verification: bracket residuals, a finite-difference oracle, RK4 drift runs."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import _kernels
from .errors import ChartMismatchError, PoleError
from .phasespace import MomentumPoly, poisson
from .symexpr import expr as E
from .symexpr.laurent import Laurent
from .symexpr.numeric import SampleWindow, compile_laurent, zero_test

__all__ = [
    "SampleWindow", "bracket_residual", "fd_gradient", "fd_bracket_oracle", "Trajectory",
    "integrate", "IntegralDrift", "DriftReport", "conservation_drift", "evaluate_along",
]


def bracket_residual(H: MomentumPoly, K: MomentumPoly, system, trials: int = 100,
                     tol: float = 1e-8, *, seed: int | None = 0, rng=None,
                     fixed: Mapping[str, float] | None = None) -> tuple[bool, float]:
    """Sample ``{H, K}`` and return ``(passed, max relative residual)``.

    The residual at a point is ``|{H,K}| / (1 + max |term|)`` over the
    expanded bracket.
    """
    if H.chart != K.chart:
        raise ChartMismatchError("H and K must share a chart")
    res = zero_test(poisson(H, K).poly, system.sampling_windows(), trials, tol,
                    seed=seed, rng=rng, fixed=fixed)
    return res.passed, res.max_ratio


def _point_value(f: MomentumPoly, point: Mapping[str, float]) -> float:
    values, _ = compile_laurent(f.poly).evaluate(point)
    v = float(values[0])
    if not math.isfinite(v):
        raise PoleError(f"non-finite value at {dict(point)}")
    return v


def fd_gradient(f: MomentumPoly, point: Mapping[str, float], step: float = 1e-5) -> dict[str, float]:
    """Central-difference partials of ``f`` in every chart variable."""
    if step <= 0:
        raise ValueError("step must be positive")
    out = {}
    for name in f.chart.names:
        hi = dict(point)
        lo = dict(point)
        hi[name] = point[name] + step
        lo[name] = point[name] - step
        out[name] = (_point_value(f, hi) - _point_value(f, lo)) / (2 * step)
    return out


def fd_bracket_oracle(H: MomentumPoly, K: MomentumPoly, point: Mapping[str, float],
                      step: float = 1e-5, *, with_scale: bool = False):
    """``{H, K}`` at ``point`` from finite differences only.

    With ``with_scale`` also returns ``sum |dH/dq dK/dp| + |dH/dp dK/dq|``,
    a natural magnitude for relative comparisons.
    """
    if H.chart != K.chart:
        raise ChartMismatchError("H and K must share a chart")
    gh = fd_gradient(H, point, step)
    gk = fd_gradient(K, point, step)
    total = 0.0
    scale = 0.0
    for q, p in H.chart.pairs:
        a, b = gh[q] * gk[p], gh[p] * gk[q]
        total += a - b
        scale += abs(a) + abs(b)
    return (total, scale) if with_scale else total


# ---------------------------------------------------------------------------
# integration


@dataclass
class Trajectory:
    """States on a uniform time grid; ``states[i]`` is at ``times[i]``."""

    names: tuple[str, ...]
    times: np.ndarray
    states: np.ndarray
    dt: float
    t_end: float
    truncated: bool
    params: dict[str, float] = field(default_factory=dict)
    half: "Trajectory | None" = None

    @property
    def steps(self) -> int:
        return len(self.times) - 1

    def bindings(self) -> dict[str, np.ndarray]:
        out = {n: self.states[:, i] for i, n in enumerate(self.names)}
        out.update({k: np.full(len(self.times), v) for k, v in self.params.items()})
        return out

    def final(self) -> dict[str, float]:
        return {n: float(self.states[-1, i]) for i, n in enumerate(self.names)}


_KINDS = {
    E.Sin: _kernels.ATOM_SIN, E.Cos: _kernels.ATOM_COS,
    E.Sinh: _kernels.ATOM_SINH, E.Cosh: _kernels.ATOM_COSH,
    E.TagS: _kernels.ATOM_TAGS, E.TagC: _kernels.ATOM_TAGC,
}


def _linear_arg(arg: E.Expr, slots: Mapping[str, int]):
    """``(slot, scale, offset)`` if ``arg = scale * z[slot] + offset`` else None."""
    poly = Laurent.from_expr(arg)
    slot, scale, offset = None, 0.0, 0.0
    for mono, c in poly.terms.items():
        if not mono:
            offset = float(c)
        elif len(mono) == 1 and mono[0][1] == 1 and isinstance(mono[0][0], (E.Var, E.Param)):
            name = mono[0][0].name
            if slot is not None or name not in slots:
                return None
            slot, scale = slots[name], float(c)
        else:
            return None
    if slot is None:
        return None
    return slot, scale, offset


def _atom_program(atoms: Sequence[E.Expr], slots: Mapping[str, int]):
    n = len(atoms)
    kind = np.zeros(n, dtype=np.int32)
    slot = np.zeros(n, dtype=np.int32)
    scale = np.ones(n)
    offset = np.zeros(n)
    kslot = np.full(n, -1, dtype=np.int32)
    kconst = np.zeros(n)
    for i, a in enumerate(atoms):
        if isinstance(a, (E.Var, E.Param)):
            if a.name not in slots:
                return None
            kind[i], slot[i] = _kernels.ATOM_ID, slots[a.name]
            continue
        k = _KINDS.get(type(a))
        lin = _linear_arg(a.arg, slots) if k is not None else None
        if lin is None:
            return None
        kind[i] = k
        slot[i], scale[i], offset[i] = lin
        if isinstance(a, (E.TagS, E.TagC)):
            if isinstance(a.kappa, E.Const):
                kconst[i] = float(a.kappa.value)
            elif isinstance(a.kappa, E.Param) and a.kappa.name in slots:
                kslot[i] = slots[a.kappa.name]
            else:
                return None
    return kind, slot, scale, offset, kslot, kconst


def _vector_field(H: MomentumPoly) -> list[Laurent]:
    """[dH/dp_i..., -dH/dq_i...] ordered like ``chart.names``."""
    chart = H.chart
    qdot = [H.poly.diff(p) for p in chart.momenta]
    pdot = [-H.poly.diff(q) for q in chart.coordinates]
    return qdot + pdot


class _Program:
    """Hamilton's equations flattened into one term table with component tags."""

    def __init__(self, H: MomentumPoly, params: Mapping[str, float]):
        names = H.chart.names
        self.names = names
        self.param_names = tuple(sorted(params))
        self.param_values = np.array([float(params[k]) for k in self.param_names])
        slots = {n: i for i, n in enumerate(names)}
        slots.update({p: len(names) + j for j, p in enumerate(self.param_names)})
        field_ = _vector_field(H)
        missing = set().union(*(f.free_symbols() for f in field_)) - set(slots)
        if missing:
            raise KeyError(f"unbound symbols in H: {sorted(missing)}")
        self.field = field_
        atoms = sorted(set().union(*(f.atoms() for f in field_)), key=lambda a: a.key)
        index = {a: i for i, a in enumerate(atoms)}
        ptr, idx, exps, coefs, comp = [0], [], [], [], []
        for c_i, f in enumerate(field_):
            for mono, c in f.terms.items():
                for a, k in mono:
                    idx.append(index[a])
                    exps.append(k)
                ptr.append(len(idx))
                coefs.append(float(c))
                comp.append(c_i)
        self.table = (np.asarray(ptr, dtype=np.int64), np.asarray(idx, dtype=np.int32),
                      np.asarray(exps, dtype=np.int32), np.asarray(coefs, dtype=np.float64),
                      np.asarray(comp, dtype=np.int32))
        self.atoms = atoms
        self.linear = _atom_program(atoms, slots)

    def rhs_generic(self, y: np.ndarray) -> np.ndarray | None:
        b = {n: float(v) for n, v in zip(self.names, y)}
        b.update(zip(self.param_names, self.param_values))
        out = np.empty(len(self.names))
        for i, f in enumerate(self.field):
            values, _ = compile_laurent(f).evaluate(b)
            out[i] = values[0]
        return out if np.all(np.isfinite(out)) else None


def _rk4_generic(prog: _Program, y0, dt, nsteps, lo, hi):
    traj = np.empty((nsteps + 1, len(y0)))
    traj[0] = y0
    y = np.array(y0, dtype=float)
    for step in range(nsteps):
        k1 = prog.rhs_generic(y)
        k2 = None if k1 is None else prog.rhs_generic(y + 0.5 * dt * k1)
        k3 = None if k2 is None else prog.rhs_generic(y + 0.5 * dt * k2)
        k4 = None if k3 is None else prog.rhs_generic(y + dt * k3)
        if k4 is None:
            return traj, step
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or np.any(y < lo) or np.any(y > hi):
            return traj, step
        traj[step + 1] = y
    return traj, nsteps


def _run(prog: _Program, y0, dt, nsteps, lo, hi, kernels):
    if prog.linear is not None:
        ptr, idx, exps, coefs, comp = prog.table
        empty_i = np.zeros(0, dtype=np.int32)
        empty_f = np.zeros(0)
        return kernels.rk4(*prog.linear, ptr, idx, exps, coefs, comp,
                           np.ascontiguousarray(y0, dtype=float), prog.param_values,
                           float(dt), int(nsteps), lo, hi, empty_i, empty_f, empty_f)
    return _rk4_generic(prog, y0, dt, nsteps, lo, hi)


def integrate(H: MomentumPoly, start: Mapping[str, float], t_end: float, dt: float, *,
              params: Mapping[str, float] | None = None,
              bounds: Mapping[str, tuple[float, float]] | None = None,
              halving: bool = True, kernels=None) -> Trajectory:
    """Classic RK4 for ``q' = dH/dp, p' = -dH/dq``.

    ``start`` binds every chart variable and may also carry parameter
    values (or pass them in ``params``). The run stops early, with
    ``truncated=True``, when the state leaves ``bounds`` or the vector
    field stops being finite. With ``halving`` the same run at ``dt/2`` is
    attached as ``.half``.
    """
    if not dt > 0 or not math.isfinite(dt):
        raise ValueError("dt must be positive")
    if not t_end > 0:
        raise ValueError("t_end must be positive")
    names = H.chart.names
    params = dict(params or {})
    for k, v in start.items():
        if k not in names:
            params.setdefault(k, float(v))
    missing = [n for n in names if n not in start]
    if missing:
        raise KeyError(f"start is missing {missing}")
    y0 = np.array([float(start[n]) for n in names])
    bounds = bounds or {}
    lo = np.array([bounds.get(n, (-np.inf, np.inf))[0] for n in names], dtype=float)
    hi = np.array([bounds.get(n, (-np.inf, np.inf))[1] for n in names], dtype=float)
    prog = _Program(H, params)
    kernels = kernels or _kernels

    def one(step):
        nsteps = int(round(t_end / step))
        traj, done = _run(prog, y0, step, nsteps, lo, hi, kernels)
        times = np.arange(done + 1) * step
        return Trajectory(names, times, traj[: done + 1].copy(), step, float(t_end),
                          done < nsteps, dict(params))

    run = one(dt)
    if halving:
        run.half = one(dt / 2)
    return run


def evaluate_along(f: MomentumPoly, traj: Trajectory) -> np.ndarray:
    values, _ = compile_laurent(f.poly).evaluate(traj.bindings())
    return values


def _drift(values: np.ndarray) -> float:
    if len(values) == 0:
        return 0.0
    v0 = values[0]
    return float(np.max(np.abs(values - v0)) / max(1.0, abs(v0)))


@dataclass
class IntegralDrift:
    name: str
    drift: float
    drift_half: float | None = None
    conserved: bool = True

    @property
    def halving_ratio(self) -> float | None:
        if self.drift_half is None or self.drift_half == 0:
            return None
        return self.drift / self.drift_half


@dataclass
class DriftReport:
    """Relative drift ``max |F(t) - F(0)| / max(1, |F(0)|)`` per integral."""

    integrals: list[IntegralDrift]
    t_end: float
    dt: float
    steps: int
    t_reached: float
    truncated: bool
    threshold: float

    def __getitem__(self, name: str) -> IntegralDrift:
        for d in self.integrals:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def all_conserved(self) -> bool:
        return not self.truncated and all(d.conserved for d in self.integrals)

    def to_dict(self) -> dict:
        out = asdict(self)
        for d, src in zip(out["integrals"], self.integrals):
            d["halving_ratio"] = src.halving_ratio
        out["schema"] = 1
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)


def conservation_drift(H: MomentumPoly, integrals, start: Mapping[str, float], t_end: float,
                       dt: float, *, threshold: float = 1e-6, **kwargs) -> DriftReport:
    """Integrate under ``H`` and report the drift of each integral.

    ``integrals`` is a mapping ``name -> MomentumPoly`` or a sequence (named
    ``F0, F1, ...``). Integrals on a sub-chart of H are lifted.
    """
    if not isinstance(integrals, Mapping):
        integrals = {f"F{i}": f for i, f in enumerate(integrals)}
    run = integrate(H, start, t_end, dt, **kwargs)
    out = []
    for name, f in integrals.items():
        f = f.lift(H.chart)
        d = _drift(evaluate_along(f, run))
        dh = _drift(evaluate_along(f, run.half)) if run.half is not None else None
        out.append(IntegralDrift(name, d, dh, bool(d < threshold)))
    return DriftReport(out, float(t_end), float(dt), run.steps, float(run.times[-1]),
                       run.truncated, threshold)
