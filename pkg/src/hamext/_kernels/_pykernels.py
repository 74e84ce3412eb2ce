"""numpy / pure-Python implementations of the hot kernels.

Behaviour must match ``_ckernels.pyx`` exactly; tests run both.

Term tables use a CSR layout: term ``t`` owns entries
``ptr[t]:ptr[t+1]`` of ``atom_idx`` / ``exps``.

Linear atom programs (used by :func:`rk4`) describe each atom as
``kind(scale * z[slot] + offset)`` where ``z`` is the concatenation of the
state vector and the fixed parameter vector, and ``kind`` is one of the
``ATOM_*`` codes. Tagged kinds read their curvature from ``z[kslot]`` when
``kslot >= 0`` else from ``kconst``.
"""
from __future__ import annotations

import math

import numpy as np

ATOM_ID, ATOM_SIN, ATOM_COS, ATOM_SINH, ATOM_COSH, ATOM_TAGS, ATOM_TAGC = range(7)


def eval_terms(atom_vals, ptr, atom_idx, exps, coefs):
    """Sum of monomials at each of N points.

    Returns ``(values, magnitudes)`` where ``magnitudes[i]`` is the largest
    absolute term at point ``i``.
    """
    atom_vals = np.asarray(atom_vals, dtype=np.float64)
    n = atom_vals.shape[0]
    t = coefs.shape[0]
    terms = np.empty((n, t))
    terms[:] = coefs
    if t:
        owner = np.repeat(np.arange(t), np.diff(ptr))
        with np.errstate(all="ignore"):
            for a in np.unique(atom_idx):
                sel = atom_idx == a
                cols = owner[sel]
                powers = atom_vals[:, a:a + 1] ** exps[sel].astype(np.float64)
                # repeated atoms in one term cannot occur, so cols are unique
                terms[:, cols] *= powers
    values = terms.sum(axis=1)
    mags = np.abs(terms).max(axis=1) if t else np.zeros(n)
    return values, mags


def _tag_s(x, k):
    if k > 0:
        r = math.sqrt(k)
        return math.sin(r * x) / r
    if k < 0:
        r = math.sqrt(-k)
        return math.sinh(r * x) / r
    return x


def _tag_c(x, k):
    if k > 0:
        return math.cos(math.sqrt(k) * x)
    if k < 0:
        return math.cosh(math.sqrt(-k) * x)
    return 1.0


def eval_atoms(kind, slot, scale, offset, kslot, kconst, z, out):
    for a in range(kind.shape[0]):
        x = scale[a] * z[slot[a]] + offset[a]
        kd = kind[a]
        if kd == ATOM_ID:
            out[a] = x
        elif kd == ATOM_SIN:
            out[a] = math.sin(x)
        elif kd == ATOM_COS:
            out[a] = math.cos(x)
        elif kd == ATOM_SINH:
            out[a] = math.sinh(x)
        elif kd == ATOM_COSH:
            out[a] = math.cosh(x)
        else:
            k = z[kslot[a]] if kslot[a] >= 0 else kconst[a]
            out[a] = _tag_s(x, k) if kd == ATOM_TAGS else _tag_c(x, k)


def _rhs(prog, z, atoms_buf, dim, out):
    kind, slot, scale, offset, kslot, kconst, ptr, atom_idx, exps, coefs, comp = prog
    eval_atoms(kind, slot, scale, offset, kslot, kconst, z, atoms_buf)
    out[:] = 0.0
    for t in range(coefs.shape[0]):
        v = coefs[t]
        for j in range(ptr[t], ptr[t + 1]):
            e = exps[j]
            x = atoms_buf[atom_idx[j]]
            if e > 0:
                v *= x ** e
            else:
                if x == 0.0:
                    return False
                v /= x ** (-e)
        out[comp[t]] += v
    return True


def _outside(y, lo, hi, pole_slot, pole_center, pole_radius):
    for i in range(y.shape[0]):
        if not (lo[i] <= y[i] <= hi[i]):
            return True
    for j in range(pole_slot.shape[0]):
        if abs(y[pole_slot[j]] - pole_center[j]) < pole_radius[j]:
            return True
    return False


def rk4(kind, slot, scale, offset, kslot, kconst,
        ptr, atom_idx, exps, coefs, comp,
        y0, params, dt, nsteps, lo, hi, pole_slot, pole_center, pole_radius):
    """Classic RK4 for ``dy/dt = F(y)`` with F a compiled term table.

    ``comp[t]`` is the output component of term ``t``. Returns
    ``(trajectory, n_done)``; ``trajectory`` has ``n_done + 1`` valid rows.
    Integration stops early (``n_done < nsteps``) when the state leaves
    ``[lo, hi]``, approaches a declared pole, or the vector field blows up.
    """
    dim = y0.shape[0]
    prog = (kind, slot, scale, offset, kslot, kconst, ptr, atom_idx, exps, coefs, comp)
    traj = np.empty((nsteps + 1, dim))
    traj[0] = y0
    np_ = params.shape[0]
    z = np.empty(dim + np_)
    z[dim:] = params
    atoms_buf = np.empty(kind.shape[0])
    k1, k2, k3, k4 = (np.empty(dim) for _ in range(4))
    y = np.array(y0, dtype=np.float64)
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(nsteps):
        z[:dim] = y
        if not _rhs(prog, z, atoms_buf, dim, k1):
            return traj, step
        z[:dim] = y + half * k1
        if not _rhs(prog, z, atoms_buf, dim, k2):
            return traj, step
        z[:dim] = y + half * k2
        if not _rhs(prog, z, atoms_buf, dim, k3):
            return traj, step
        z[:dim] = y + dt * k3
        if not _rhs(prog, z, atoms_buf, dim, k4):
            return traj, step
        y = y + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)) or _outside(y, lo, hi, pole_slot, pole_center, pole_radius):
            return traj, step
        traj[step + 1] = y
    return traj, nsteps
