# cython: boundscheck=False, wraparound=False, initializedcheck=False
# cython: cdivision=True, language_level=3
"""Compiled min-sum syndrome decoder.

Operation-for-operation identical to the numpy fallback (_bp_py): the
variable update adds messages in fixed slot order and the check update uses
only min/sign operations, so both backends return bit-identical results.
"""

import numpy as np

cimport cython
from libc.math cimport INFINITY, fabs


def bp_decode(long[:, ::1] var_edge, long[::1] edge_var,
              long[::1] check_ptr, long[::1] check_edge,
              unsigned char[::1] target, double llr0,
              int max_iters, int patience, double alpha):
    cdef Py_ssize_t n = var_edge.shape[0]
    cdef Py_ssize_t n_edges = edge_var.shape[0]
    cdef Py_ssize_t m = target.shape[0]

    e_hat_arr = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] e_hat = e_hat_arr
    if m == 0 or n_edges == 0:
        return True, e_hat_arr

    v2c_arr = np.full(n_edges, llr0, dtype=np.float64)
    c2v_arr = np.zeros(n_edges, dtype=np.float64)
    cdef double[::1] v2c = v2c_arr
    cdef double[::1] c2v = c2v_arr

    cdef Py_ssize_t it, c, e, lo, hi, v, k, first_pos
    cdef double mag, mn1, mn2, out_mag, m0, m1, m2, posterior
    cdef unsigned char seg_sign, sgn, out_sign, par
    cdef long slot0, slot1, slot2
    cdef int best_unsat = <int>m + 1
    cdef int stall = 0
    cdef int unsat

    for it in range(max_iters):
        # Check-node update: XOR of signs, normalized min / second-min.
        for c in range(m):
            lo = check_ptr[c]
            hi = check_ptr[c + 1]
            seg_sign = 0
            mn1 = INFINITY
            mn2 = INFINITY
            first_pos = -1
            for e in range(lo, hi):
                mag = fabs(v2c[e])
                if v2c[e] < 0:
                    seg_sign ^= 1
                if mag < mn1:
                    mn1 = mag
            for e in range(lo, hi):
                if fabs(v2c[e]) == mn1:
                    first_pos = e
                    break
            for e in range(lo, hi):
                if e != first_pos:
                    mag = fabs(v2c[e])
                    if mag < mn2:
                        mn2 = mag
            for e in range(lo, hi):
                if e == first_pos:
                    out_mag = mn2
                else:
                    out_mag = mn1
                sgn = 1 if v2c[e] < 0 else 0
                out_sign = seg_sign ^ sgn ^ target[c]
                if out_sign > 0:
                    c2v[e] = alpha * (-out_mag)
                else:
                    c2v[e] = alpha * out_mag

        # Variable update in fixed slot order; absent slots contribute 0.0.
        unsat = 0
        for v in range(n):
            slot0 = var_edge[v, 0]
            slot1 = var_edge[v, 1]
            slot2 = var_edge[v, 2]
            m0 = c2v[slot0] if slot0 >= 0 else 0.0
            m1 = c2v[slot1] if slot1 >= 0 else 0.0
            m2 = c2v[slot2] if slot2 >= 0 else 0.0
            posterior = ((llr0 + m0) + m1) + m2
            if slot0 >= 0:
                v2c[slot0] = (llr0 + m1) + m2
            if slot1 >= 0:
                v2c[slot1] = (llr0 + m0) + m2
            if slot2 >= 0:
                v2c[slot2] = (llr0 + m0) + m1
            e_hat[v] = 1 if posterior < 0 else 0

        for c in range(m):
            par = 0
            for e in range(check_ptr[c], check_ptr[c + 1]):
                par ^= e_hat[edge_var[e]]
            if par != target[c]:
                unsat += 1
        if unsat == 0:
            return True, e_hat_arr
        if unsat < best_unsat:
            best_unsat = unsat
            stall = 0
        else:
            stall += 1
            if stall >= patience:
                return False, e_hat_arr
    return False, e_hat_arr
