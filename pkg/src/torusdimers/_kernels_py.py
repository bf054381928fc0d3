"""Pure-Python reference implementations of the hot kernels.

Signatures and outputs match the compiled ``_kernels`` module exactly; the
backend selector in ``_backend`` falls back to these when the extension is
not built.
"""

import numpy as np


def _site_tables(m1, m2):
    n = m1 * m2
    targets = []
    for x2 in range(m2):
        for x1 in range(m1):
            idx = x2 * m1 + x1
            targets.append(
                (idx, x2 * m1 + (x1 + 1) % m1, ((x2 + 1) % m2) * m1 + x1)
            )
    # closing[i]: sites whose every possible preimage has index <= i, with max == i.
    # Once site i is assigned these must already be covered.
    closing = [[] for _ in range(n)]
    for x2 in range(m2):
        for x1 in range(m1):
            y = x2 * m1 + x1
            pre = (y, x2 * m1 + (x1 - 1) % m1, ((x2 - 1) % m2) * m1 + x1)
            closing[max(pre)].append(y)
    return targets, closing


def enumerate_moves(m1, m2):
    """All labelled dimer matchings of the (m1, m2) torus.

    Returns an ``int8`` array of shape ``(count, m1*m2)``; row entries are
    move codes (0 stay, 1 step e1, 2 step e2) indexed by ``x2*m1 + x1``.
    Rows come out in lexicographic order of the code vectors.
    """
    n = m1 * m2
    targets, closing = _site_tables(m1, m2)
    used = [False] * n
    moves = [0] * n
    out = []

    def rec(i):
        if i == n:
            out.append(tuple(moves))
            return
        ti = targets[i]
        for mv in range(3):
            t = ti[mv]
            if used[t]:
                continue
            used[t] = True
            moves[i] = mv
            ok = True
            for y in closing[i]:
                if not used[y]:
                    ok = False
                    break
            if ok:
                rec(i + 1)
            used[t] = False

    rec(0)
    return np.array(out, dtype=np.int8).reshape(len(out), n)


def classify_beads(strings, times, n, k):
    """Occupation number of each sampled point set, or -1 if invalid.

    ``strings`` (int64) and ``times`` (float64) have shape ``(S, n*k)``; row
    ``s`` lists labelled points ``(times[s, i], strings[s, i])``.  A row is
    valid when every string carries exactly ``k`` points and each cyclically
    adjacent pair of strings interlaces.  For valid rows the occupation number
    is the summed gap from each bead to the next bead (weakly later, cyclic in
    time) on the string above.
    """
    strings = np.asarray(strings, dtype=np.int64)
    times = np.asarray(times, dtype=np.float64)
    S = strings.shape[0]
    out = np.full(S, -1, dtype=np.int64)
    ok = np.ones(S, dtype=bool)
    for h in range(n):
        ok &= (strings == h).sum(axis=1) == k
    idx = np.nonzero(ok)[0]
    if idx.size == 0:
        return out
    st = strings[idx]
    tt = times[idx]
    order = np.lexsort((tt, st), axis=-1)
    T = np.take_along_axis(tt, order, axis=1).reshape(-1, n, k)
    valid = np.ones(idx.size, dtype=bool)
    ell = np.zeros(idx.size)
    for h in range(n):
        A = T[:, h, :]
        B = T[:, (h + 1) % n, :]
        first = (A <= B).all(axis=1) & (B[:, :-1] < A[:, 1:]).all(axis=1)
        second = (B < A).all(axis=1) & (A[:, :-1] <= B[:, 1:]).all(axis=1)
        valid &= first | second
        gap_first = (B - A).sum(axis=1)
        gap_second = (B[:, 1:] - A[:, :-1]).sum(axis=1) + (B[:, 0] + 1.0 - A[:, -1])
        ell += np.where(first, gap_first, gap_second)
    out[idx[valid]] = np.rint(ell[valid]).astype(np.int64)
    return out
