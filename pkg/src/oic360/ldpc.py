"""Rate-adaptive syndrome code: LDPC with accumulated, nested syndromes.

The code has one check row per source bit (length n, variable degree 3, row
degree 3).  The encoder computes all n syndrome bits, runs them through an
accumulator (prefix XOR) and releases accumulated bits following a fixed
bit-reversal schedule, so every ladder rung's bit set is a strict prefix of
the next and is spread uniformly over the accumulator chain.  The first
released bit is always the last accumulated bit, hence every rung constrains
all n rows.

Received accumulated bits split the chain into segments; each segment acts as
one merged parity check (the XOR of its rows, variables with even multiplicity
cancelling).  Partial rungs decode with normalized min-sum belief propagation
on the merged graph; the full-rate rung recovers the source exactly by
inverting the parity matrix, which the seeded construction guarantees to be
invertible.
"""

from __future__ import annotations

import math

import numpy as np

from .kernels import BP_ALPHA, BP_MAX_ITERS, BP_PATIENCE, bp_decode

DEFAULT_SEED = 20200813
LADDER_STEPS = 64
VAR_DEGREE = 3


def binary_entropy(p: float) -> float:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def _bit_reversal_order(n: int) -> np.ndarray:
    """Transmission order of accumulated-bit indices (0-based)."""
    bits = n.bit_length() - 1
    k = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((k >> b) & 1) << (bits - 1 - b)
    return (n - 1) - rev


def _gf2_inverse(var_rows: np.ndarray, n: int):
    """Inverse of the n x n parity matrix over GF(2), or None if singular.

    var_rows[v] lists the (distinct) check rows variable v participates in.
    """
    mat = np.zeros((n, 2 * n), dtype=np.uint8)
    for v in range(n):
        mat[var_rows[v], v] ^= 1
    mat[:, n:] = np.eye(n, dtype=np.uint8)
    for col in range(n):
        pivots = np.nonzero(mat[col:, col])[0]
        if pivots.size == 0:
            return None
        piv = col + pivots[0]
        if piv != col:
            mat[[col, piv]] = mat[[piv, col]]
        hits = np.nonzero(mat[:, col])[0]
        hits = hits[hits != col]
        mat[hits] ^= mat[col]
    return mat[:, n:]


class SyndromeCode:
    """Seeded rate-adaptive syndrome code of length n (a power of two)."""

    def __init__(self, n: int, seed: int = DEFAULT_SEED):
        if n & (n - 1):
            raise ValueError("code length must be a power of two")
        if n % LADDER_STEPS:
            raise ValueError("code length must be divisible by the ladder")
        self.n = n
        self.seed = seed
        self.step = n // LADDER_STEPS
        self.order = _bit_reversal_order(n)
        self.var_rows, self.inv = self._construct(n, seed)
        self._inv_i32 = self.inv.astype(np.int32)
        # CSR of variables per row, for syndrome computation.
        rows = self.var_rows.ravel()
        var_of = np.repeat(np.arange(n), VAR_DEGREE)
        srt = np.argsort(rows, kind="stable")
        self._row_sorted_vars = var_of[srt]
        counts = np.bincount(rows, minlength=n)
        self._row_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self._graphs: dict = {}

    @staticmethod
    def _construct(n: int, seed: int):
        """Draw degree-(3,3) row assignments until the matrix is invertible."""
        for attempt in range(64):
            rng = np.random.Generator(np.random.PCG64(
                np.random.SeedSequence([seed, attempt])))
            slots = rng.permutation(np.repeat(np.arange(n), VAR_DEGREE))
            var_rows = slots.reshape(n, VAR_DEGREE)
            for _ in range(200):
                dup = ((var_rows[:, 0] == var_rows[:, 1])
                       | (var_rows[:, 1] == var_rows[:, 2])
                       | (var_rows[:, 0] == var_rows[:, 2]))
                bad = np.nonzero(dup)[0]
                if bad.size == 0:
                    break
                flat = var_rows.ravel()
                for v in bad:
                    j = int(rng.integers(n * VAR_DEGREE))
                    k = VAR_DEGREE * v + 1
                    flat[k], flat[j] = flat[j], flat[k]
                var_rows = flat.reshape(n, VAR_DEGREE)
            else:
                continue
            var_rows = np.sort(var_rows, axis=1).astype(np.int64)
            inv = _gf2_inverse(var_rows, n)
            if inv is not None:
                return var_rows, inv
        raise RuntimeError(f"no invertible code found for seed {seed}")

    # Ladder -------------------------------------------------------------
    def rung_bits(self, t: int) -> int:
        return t * self.step

    def rung_for_bits(self, bits: int) -> int:
        """Smallest rung whose size is >= the requested bit count."""
        return min(LADDER_STEPS, max(1, -(-bits // self.step)))

    # Syndromes ----------------------------------------------------------
    def syndromes(self, x: np.ndarray) -> np.ndarray:
        """Row syndromes of a bit vector (uint8)."""
        contrib = x[self._row_sorted_vars]
        return np.bitwise_xor.reduceat(contrib, self._row_ptr[:-1]).astype(np.uint8)

    def accumulated(self, x: np.ndarray) -> np.ndarray:
        return np.bitwise_xor.accumulate(self.syndromes(x)).astype(np.uint8)

    def prefix_bits(self, acc: np.ndarray, n_bits: int) -> np.ndarray:
        """First n_bits accumulated bits in transmission order."""
        return acc[self.order[:n_bits]]

    # Merged graph ---------------------------------------------------------
    def _graph(self, t: int):
        g = self._graphs.get(t)
        if g is None:
            pos = np.sort(self.order[:self.rung_bits(t)])
            seg_of_row = np.searchsorted(pos, np.arange(self.n), side="left")
            segs = np.sort(seg_of_row[self.var_rows], axis=1)
            e01 = segs[:, 0] == segs[:, 1]
            e12 = segs[:, 1] == segs[:, 2]
            tri = e01 & e12
            pairs = []
            vars_all = np.arange(self.n)
            # multiplicity-3 or cancelled-pair slots leave one odd segment
            pairs.append((vars_all[tri], segs[tri, 0]))
            only01 = e01 & ~tri
            pairs.append((vars_all[only01], segs[only01, 2]))
            only12 = e12 & ~tri
            pairs.append((vars_all[only12], segs[only12, 0]))
            none = ~e01 & ~e12
            for k in range(3):
                pairs.append((vars_all[none], segs[none, k]))
            ev = np.concatenate([p[0] for p in pairs])
            ec = np.concatenate([p[1] for p in pairs])
            srt = np.lexsort((ev, ec))
            ev, ec = ev[srt], ec[srt]
            kept_segs, ec_compact = np.unique(ec, return_inverse=True)
            m = kept_segs.size
            counts = np.bincount(ec_compact, minlength=m)
            check_ptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
            var_edge = np.full((self.n, VAR_DEGREE), -1, dtype=np.int64)
            slot = np.zeros(self.n, dtype=np.int64)
            for e, v in enumerate(ev):
                var_edge[v, slot[v]] = e
                slot[v] += 1
            g = {
                "pos": pos,
                "kept": kept_segs,
                "edge_var": ev.astype(np.int64),
                "check_ptr": check_ptr,
                "check_edge": np.arange(ev.size, dtype=np.int64),
                "var_edge": var_edge,
            }
            self._graphs[t] = g
        return g

    def _segment_values(self, acc_at_pos: np.ndarray) -> np.ndarray:
        """Per-segment XOR targets from accumulated bits at sorted positions."""
        out = acc_at_pos.copy()
        out[1:] ^= acc_at_pos[:-1]
        return out

    def decode_rung(self, bits: np.ndarray, t: int, y: np.ndarray,
                    crossover: float):
        """Decode a source plane from its rung-t prefix and a side plane.

        Returns the decoded plane or None when belief propagation does not
        converge.  The full-rate rung ignores the side plane and solves the
        linear system exactly.
        """
        r = self.rung_bits(t)
        if bits.shape[0] != r:
            raise ValueError(f"expected {r} bits for rung {t}")
        if t == LADDER_STEPS:
            return self.solve_full(bits)
        g = self._graph(t)
        srt = np.argsort(self.order[:r], kind="stable")
        acc_x_at_pos = bits[srt]
        acc_y = self.accumulated(y)
        targets = (self._segment_values(acc_x_at_pos)
                   ^ self._segment_values(acc_y[g["pos"]]))
        targets = targets[g["kept"]].astype(np.uint8)
        p = min(max(crossover, 1e-9), 0.4999999)
        llr0 = math.log((1.0 - p) / p)
        ok, e_hat = bp_decode(g["var_edge"], g["edge_var"], g["check_ptr"],
                              g["check_edge"], targets, llr0,
                              BP_MAX_ITERS, BP_PATIENCE, BP_ALPHA)
        if not ok:
            return None
        return (y ^ e_hat).astype(np.uint8)

    def solve_full(self, bits: np.ndarray) -> np.ndarray:
        """Exact recovery from all n accumulated bits."""
        acc = np.empty(self.n, dtype=np.uint8)
        acc[self.order] = bits
        s = acc.copy()
        s[1:] ^= acc[:-1]
        return ((self._inv_i32 @ s.astype(np.int32)) & 1).astype(np.uint8)


_code_cache: dict = {}


def get_code(n: int, seed: int = DEFAULT_SEED) -> SyndromeCode:
    key = (n, seed)
    if key not in _code_cache:
        _code_cache[key] = SyndromeCode(n, seed)
    return _code_cache[key]
