"""Vectorized numpy fallback for the min-sum syndrome decoder.

Must stay operation-for-operation identical to the compiled kernel: variable
updates add messages in fixed slot order, check updates only use min / sign
operations, so both backends produce bit-identical float64 message values.
"""

import numpy as np


def bp_decode(var_edge, edge_var, check_ptr, check_edge, target, llr0,
              max_iters, patience, alpha):
    """Decode an error pattern against a merged-check syndrome.

    var_edge: (n, 3) int32 edge ids per variable slot, -1 when absent.
    edge_var: (E,) int32 variable of each edge (grouped by check).
    check_ptr/check_edge: CSR of edges per check; check_edge is the identity
        permutation when edges are stored check-major (kept for layout parity
        with the compiled kernel).
    target: (m,) uint8 syndrome the error pattern must satisfy.
    llr0: prior log-likelihood magnitude (bits biased toward zero).

    Returns (ok, e_hat).
    """
    n = var_edge.shape[0]
    n_edges = edge_var.shape[0]
    m = target.shape[0]
    if m == 0 or n_edges == 0:
        return True, np.zeros(n, dtype=np.uint8)

    starts = check_ptr[:-1]
    seg_of_edge = np.repeat(np.arange(m), np.diff(check_ptr))
    edge_ids = np.arange(n_edges)

    slot_valid = var_edge >= 0
    safe_slots = np.where(slot_valid, var_edge, 0)

    v2c = np.full(n_edges, llr0, dtype=np.float64)
    c2v = np.zeros(n_edges, dtype=np.float64)
    e_hat = np.zeros(n, dtype=np.uint8)

    best_unsat = m + 1
    stall = 0

    for _ in range(max_iters):
        # Check-node update: sign via XOR, magnitude via normalized min-sum.
        sign = (v2c < 0).astype(np.uint8)
        mag = np.abs(v2c)
        seg_sign = np.bitwise_xor.reduceat(sign, starts)
        seg_min = np.minimum.reduceat(mag, starts)
        cand = np.where(mag == seg_min[seg_of_edge], edge_ids, n_edges)
        first_min = np.minimum.reduceat(cand, starts)
        is_first = edge_ids == first_min[seg_of_edge]
        mag2 = np.where(is_first, np.inf, mag)
        seg_min2 = np.minimum.reduceat(mag2, starts)
        out_mag = np.where(is_first, seg_min2[seg_of_edge],
                           seg_min[seg_of_edge])
        out_sign = seg_sign[seg_of_edge] ^ sign ^ target[seg_of_edge]
        c2v = alpha * np.where(out_sign > 0, -out_mag, out_mag)

        # Variable update in fixed slot order; absent slots contribute 0.0.
        msg = np.where(slot_valid, c2v[safe_slots], 0.0)
        m0, m1, m2 = msg[:, 0], msg[:, 1], msg[:, 2]
        posterior = ((llr0 + m0) + m1) + m2
        out0 = (llr0 + m1) + m2
        out1 = (llr0 + m0) + m2
        out2 = (llr0 + m0) + m1
        v2c_slots = np.stack([out0, out1, out2], axis=1)
        v2c[safe_slots[slot_valid]] = v2c_slots[slot_valid]

        e_hat = (posterior < 0).astype(np.uint8)
        par = np.bitwise_xor.reduceat(e_hat[edge_var], starts)
        unsat = int(np.count_nonzero(par != target))
        if unsat == 0:
            return True, e_hat
        if unsat < best_unsat:
            best_unsat = unsat
            stall = 0
        else:
            stall += 1
            if stall >= patience:
                return False, e_hat
    return False, e_hat
