# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sinh, cosh, sqrt, fabs, isfinite

cnp.import_array()

DEF ATOM_ID = 0
DEF ATOM_SIN = 1
DEF ATOM_COS = 2
DEF ATOM_SINH = 3
DEF ATOM_COSH = 4
DEF ATOM_TAGS = 5
DEF ATOM_TAGC = 6


cdef inline double ipow(double x, int e) nogil:
    cdef double r = 1.0
    cdef int k = e if e > 0 else -e
    while k:
        if k & 1:
            r *= x
        x *= x
        k >>= 1
    if e < 0:
        return 1.0 / r
    return r


def eval_terms(double[:, ::1] atom_vals, cnp.int64_t[::1] ptr, int[::1] atom_idx,
               int[::1] exps, double[::1] coefs):
    cdef Py_ssize_t n = atom_vals.shape[0]
    cdef Py_ssize_t nt = coefs.shape[0]
    values_arr = np.zeros(n)
    mags_arr = np.zeros(n)
    cdef double[::1] values = values_arr
    cdef double[::1] mags = mags_arr
    cdef Py_ssize_t i, t, j
    cdef double v, acc, mx, av
    with nogil:
        for i in range(n):
            acc = 0.0
            mx = 0.0
            for t in range(nt):
                v = coefs[t]
                for j in range(ptr[t], ptr[t + 1]):
                    v *= ipow(atom_vals[i, atom_idx[j]], exps[j])
                acc += v
                av = fabs(v)
                if av > mx or av != av:
                    mx = av
            values[i] = acc
            mags[i] = mx
    return values_arr, mags_arr


cdef inline double tag_s(double x, double k) nogil:
    cdef double r
    if k > 0:
        r = sqrt(k)
        return sin(r * x) / r
    if k < 0:
        r = sqrt(-k)
        return sinh(r * x) / r
    return x


cdef inline double tag_c(double x, double k) nogil:
    if k > 0:
        return cos(sqrt(k) * x)
    if k < 0:
        return cosh(sqrt(-k) * x)
    return 1.0


cdef void eval_atoms_c(int[::1] kind, int[::1] slot, double[::1] scale, double[::1] offset,
                       int[::1] kslot, double[::1] kconst, double[::1] z, double[::1] out) nogil:
    cdef Py_ssize_t a
    cdef double x, k
    cdef int kd
    for a in range(kind.shape[0]):
        x = scale[a] * z[slot[a]] + offset[a]
        kd = kind[a]
        if kd == ATOM_ID:
            out[a] = x
        elif kd == ATOM_SIN:
            out[a] = sin(x)
        elif kd == ATOM_COS:
            out[a] = cos(x)
        elif kd == ATOM_SINH:
            out[a] = sinh(x)
        elif kd == ATOM_COSH:
            out[a] = cosh(x)
        else:
            k = z[kslot[a]] if kslot[a] >= 0 else kconst[a]
            if kd == ATOM_TAGS:
                out[a] = tag_s(x, k)
            else:
                out[a] = tag_c(x, k)


def eval_atoms(int[::1] kind, int[::1] slot, double[::1] scale, double[::1] offset,
               int[::1] kslot, double[::1] kconst, double[::1] z, double[::1] out):
    eval_atoms_c(kind, slot, scale, offset, kslot, kconst, z, out)


cdef bint rhs(int[::1] kind, int[::1] slot, double[::1] scale, double[::1] offset,
              int[::1] kslot, double[::1] kconst,
              cnp.int64_t[::1] ptr, int[::1] atom_idx, int[::1] exps, double[::1] coefs,
              int[::1] comp, double[::1] z, double[::1] atoms_buf, double[::1] out) nogil:
    cdef Py_ssize_t t, j
    cdef double v, x
    eval_atoms_c(kind, slot, scale, offset, kslot, kconst, z, atoms_buf)
    for j in range(out.shape[0]):
        out[j] = 0.0
    for t in range(coefs.shape[0]):
        v = coefs[t]
        for j in range(ptr[t], ptr[t + 1]):
            x = atoms_buf[atom_idx[j]]
            if exps[j] < 0 and x == 0.0:
                return False
            v *= ipow(x, exps[j])
        out[comp[t]] += v
    return True


def rk4(int[::1] kind, int[::1] slot, double[::1] scale, double[::1] offset,
        int[::1] kslot, double[::1] kconst,
        cnp.int64_t[::1] ptr, int[::1] atom_idx, int[::1] exps, double[::1] coefs,
        int[::1] comp, double[::1] y0, double[::1] params, double dt, Py_ssize_t nsteps,
        double[::1] lo, double[::1] hi, int[::1] pole_slot, double[::1] pole_center,
        double[::1] pole_radius):
    cdef Py_ssize_t dim = y0.shape[0]
    cdef Py_ssize_t npar = params.shape[0]
    traj_arr = np.empty((nsteps + 1, dim))
    cdef double[:, ::1] traj = traj_arr
    z_arr = np.empty(dim + npar)
    cdef double[::1] z = z_arr
    cdef double[::1] atoms_buf = np.empty(max(kind.shape[0], 1))
    cdef double[::1] y = np.array(y0, dtype=np.float64)
    cdef double[::1] k1 = np.empty(dim)
    cdef double[::1] k2 = np.empty(dim)
    cdef double[::1] k3 = np.empty(dim)
    cdef double[::1] k4 = np.empty(dim)
    cdef Py_ssize_t i, j, step
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef bint bad
    for i in range(npar):
        z[dim + i] = params[i]
    for i in range(dim):
        traj[0, i] = y0[i]
    cdef Py_ssize_t n_done = nsteps
    with nogil:
        for step in range(nsteps):
            for i in range(dim):
                z[i] = y[i]
            if not rhs(kind, slot, scale, offset, kslot, kconst, ptr, atom_idx, exps, coefs, comp, z, atoms_buf, k1):
                n_done = step
                break
            for i in range(dim):
                z[i] = y[i] + half * k1[i]
            if not rhs(kind, slot, scale, offset, kslot, kconst, ptr, atom_idx, exps, coefs, comp, z, atoms_buf, k2):
                n_done = step
                break
            for i in range(dim):
                z[i] = y[i] + half * k2[i]
            if not rhs(kind, slot, scale, offset, kslot, kconst, ptr, atom_idx, exps, coefs, comp, z, atoms_buf, k3):
                n_done = step
                break
            for i in range(dim):
                z[i] = y[i] + dt * k3[i]
            if not rhs(kind, slot, scale, offset, kslot, kconst, ptr, atom_idx, exps, coefs, comp, z, atoms_buf, k4):
                n_done = step
                break
            bad = False
            for i in range(dim):
                y[i] = y[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(y[i]) or not (lo[i] <= y[i] <= hi[i]):
                    bad = True
            for j in range(pole_slot.shape[0]):
                if fabs(y[pole_slot[j]] - pole_center[j]) < pole_radius[j]:
                    bad = True
            if bad:
                n_done = step
                break
            for i in range(dim):
                traj[step + 1, i] = y[i]
    return traj_arr, n_done
