# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled density-matrix kernels.

Qubit position ``p`` in a register of ``n`` qubits owns bit ``n - 1 - p`` of
the basis index (first qubit is the most significant bit).
"""
import numpy as np


cdef Py_ssize_t _scatter(Py_ssize_t a, list positions, int n):
    cdef int m = len(positions)
    cdef int k
    cdef Py_ssize_t out = 0
    for k in range(m):
        if (a >> (m - 1 - k)) & 1:
            out |= (<Py_ssize_t>1) << (n - 1 - <int>positions[k])
    return out


def conjugate(rho, op, positions, int n):
    """Return L rho L^dagger where L applies ``op`` to ``positions``; rho must be Hermitian."""
    cdef const double complex[:, ::1] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef const double complex[:, ::1] a = np.ascontiguousarray(op, dtype=np.complex128)
    cdef list pos = [int(p) for p in positions]
    cdef Py_ssize_t D = r.shape[0]
    cdef Py_ssize_t d = a.shape[0]
    cdef Py_ssize_t i, j, b, mask, row, ai, aj
    cdef double complex c, acc

    off_arr = np.empty(d, dtype=np.intp)
    sub_arr = np.empty(D, dtype=np.intp)
    cdef Py_ssize_t[::1] off = off_arr
    cdef Py_ssize_t[::1] sub = sub_arr
    for b in range(d):
        off[b] = _scatter(b, pos, n)
    mask = off[d - 1]
    # sub[i]: the operator-local index carried by basis index i
    cdef int k, m = len(pos)
    for i in range(D):
        ai = 0
        for k in range(m):
            ai = (ai << 1) | ((i >> (n - 1 - <int>pos[k])) & 1)
        sub[i] = ai

    # the operator's nonzero entries, row by row
    nz_arr = np.zeros(d, dtype=np.intp)
    col_arr = np.zeros((d, d), dtype=np.intp)
    val_arr = np.zeros((d, d), dtype=np.complex128)
    cdef Py_ssize_t[::1] nz = nz_arr
    cdef Py_ssize_t[:, ::1] cols = col_arr
    cdef double complex[:, ::1] vals = val_arr
    for ai in range(d):
        for b in range(d):
            if a[ai, b] != 0:
                cols[ai, nz[ai]] = off[b]
                vals[ai, nz[ai]] = a[ai, b]
                nz[ai] += 1
    conj_arr = np.conj(val_arr)
    cdef double complex[:, ::1] cvals = conj_arr

    # out[i, j] = sum over nonzero a[ai, b], a[aj, b'] of a[ai, b] rho[.., ..] conj(a[aj, b']);
    # rho is Hermitian, so only the upper triangle is computed
    out_arr = np.empty((D, D), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    cdef Py_ssize_t bi, bj, l
    cdef double complex s
    for i in range(D):
        ai = sub[i]
        bi = i & ~mask
        for j in range(i, D):
            aj = sub[j]
            bj = j & ~mask
            acc = 0
            for k in range(nz[ai]):
                row = bi | cols[ai, k]
                s = 0
                for l in range(nz[aj]):
                    s = s + r[row, bj | cols[aj, l]] * cvals[aj, l]
                acc = acc + vals[ai, k] * s
            out[i, j] = acc
            out[j, i] = acc.conjugate()
    return out_arr


def partial_trace(rho, keep, int n):
    """Trace out every position not listed in ``keep`` (order of ``keep`` kept)."""
    cdef const double complex[:, ::1] r = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef list kept = [int(p) for p in keep]
    cdef list traced = [p for p in range(n) if p not in kept]
    cdef Py_ssize_t dk = (<Py_ssize_t>1) << len(kept)
    cdef Py_ssize_t dt = (<Py_ssize_t>1) << len(traced)
    cdef Py_ssize_t a, b, t
    cdef double complex acc

    koff_arr = np.empty(dk, dtype=np.intp)
    toff_arr = np.empty(dt, dtype=np.intp)
    cdef Py_ssize_t[::1] koff = koff_arr
    cdef Py_ssize_t[::1] toff = toff_arr
    for a in range(dk):
        koff[a] = _scatter(a, kept, n)
    for t in range(dt):
        toff[t] = _scatter(t, traced, n)

    out_arr = np.zeros((dk, dk), dtype=np.complex128)
    cdef double complex[:, ::1] out = out_arr
    for a in range(dk):
        for b in range(dk):
            acc = 0
            for t in range(dt):
                acc = acc + r[koff[a] | toff[t], koff[b] | toff[t]]
            out[a, b] = acc
    return out_arr
