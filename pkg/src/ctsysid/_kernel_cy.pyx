# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled trajectory recursion kernel.

Hot loop of the package: X_{k+1} = X_k + (G @ X_k + drive[k]) for tens of
thousands of serial steps per trajectory. Contract mirrors
_kernel_py.linear_recursion.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport isfinite

cnp.import_array()


def linear_recursion(object step_matrix, object drive, object x0, double overflow_cap):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] g = np.ascontiguousarray(step_matrix, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] f = np.ascontiguousarray(drive, dtype=np.float64)
    cdef Py_ssize_t n_steps = f.shape[0]
    cdef Py_ssize_t p = f.shape[1]

    cdef cnp.ndarray[cnp.float64_t, ndim=2] states = np.empty((n_steps + 1, p), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] increments = np.empty((n_steps, p), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.array(x0, dtype=np.float64, copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] delta = np.empty(p, dtype=np.float64)

    cdef double[:, ::1] gv = g
    cdef double[:, ::1] fv = f
    cdef double[:, ::1] sv = states
    cdef double[:, ::1] dv = increments
    cdef double[::1] xv = x
    cdef double[::1] tv = delta

    cdef double cap_sq = overflow_cap * overflow_cap
    cdef Py_ssize_t k, i, j, n_done
    cdef double acc, norm_sq
    cdef bint truncated = False

    for i in range(p):
        sv[0, i] = xv[i]

    n_done = n_steps
    with nogil:
        for k in range(n_steps):
            for i in range(p):
                acc = fv[k, i]
                for j in range(p):
                    acc += gv[i, j] * xv[j]
                tv[i] = acc
            norm_sq = 0.0
            for i in range(p):
                xv[i] += tv[i]
                dv[k, i] = tv[i]
                sv[k + 1, i] = xv[i]
                norm_sq += xv[i] * xv[i]
            if norm_sq > cap_sq or not isfinite(norm_sq):
                n_done = k + 1
                truncated = True
                break

    if truncated:
        return states[: n_done + 1], increments[:n_done], n_done
    return states, increments, n_done
