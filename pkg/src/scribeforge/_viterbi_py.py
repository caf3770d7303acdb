"""Pure-numpy Viterbi fill, the fallback for the compiled kernel.

Path scores are kept as an exact pair (floored-cell count, finite log
sum) so that a zero-probability cell never absorbs finite differences
the way adding a -1e30 float would.  A candidate predecessor is better
when it has fewer floored cells, then when its finite sum is larger;
ties keep the largest predecessor state (candidate order stay,
advance-1, advance-2 with strict comparisons).

Semantics must match ``_viterbi_c`` bit for bit.
"""

import numpy as np

NEG_INF = float("-inf")


def viterbi_fill(val, floored, skip, bp):
    """Forward max pass over the extended label sequence.

    val:     (N, S) float64, finite log score per state (0.0 where floored).
    floored: (N, S) uint8, 1 where the cell had zero probability.
    skip:    (S,) uint8, 1 where the advance-by-2 transition is legal.
    bp:      (N, S) int8 output, predecessor offset (0 stay, 1, 2).

    Returns (cnt, val): final floored-cell counts (int64) and finite
    sums (float64) per state; unreachable states have val == -inf.
    """
    n, s = val.shape
    prev_val = np.full(s, NEG_INF)
    prev_cnt = np.zeros(s, dtype=np.int64)
    prev_val[0] = val[0, 0]
    prev_cnt[0] = floored[0, 0]
    if s > 1:
        prev_val[1] = val[0, 1]
        prev_cnt[1] = floored[0, 1]
    bp[0, :] = 0
    no_skip = ~skip.astype(bool)

    for t in range(1, n):
        c1_val = np.empty(s)
        c1_val[0] = NEG_INF
        c1_val[1:] = prev_val[:-1]
        c1_cnt = np.empty(s, dtype=np.int64)
        c1_cnt[0] = 0
        c1_cnt[1:] = prev_cnt[:-1]

        c2_val = np.full(s, NEG_INF)
        c2_val[2:] = prev_val[:-2]
        c2_val[no_skip] = NEG_INF
        c2_cnt = np.zeros(s, dtype=np.int64)
        c2_cnt[2:] = prev_cnt[:-2]

        best_val = prev_val.copy()
        best_cnt = prev_cnt.copy()
        off = np.zeros(s, dtype=np.int8)
        for cand_val, cand_cnt, cand_off in ((c1_val, c1_cnt, 1),
                                             (c2_val, c2_cnt, 2)):
            better = (cand_val != NEG_INF) & (
                (best_val == NEG_INF)
                | (cand_cnt < best_cnt)
                | ((cand_cnt == best_cnt) & (cand_val > best_val))
            )
            best_val[better] = cand_val[better]
            best_cnt[better] = cand_cnt[better]
            off[better] = cand_off

        bp[t, :] = off
        reachable = best_val != NEG_INF
        prev_val = np.where(reachable, best_val + val[t], NEG_INF)
        prev_cnt = np.where(reachable, best_cnt + floored[t], 0)
    return prev_cnt, prev_val


def pair_better(cnt_a, val_a, cnt_b, val_b):
    """Is score pair a strictly better than pair b?"""
    if val_a == NEG_INF:
        return False
    if val_b == NEG_INF:
        return True
    if cnt_a != cnt_b:
        return cnt_a < cnt_b
    return val_a > val_b
