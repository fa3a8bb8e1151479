"""Compiled inner loops for the projection depth.

The projection depth of N points against C reference subsets needs, for
every subset and direction, a median and a median absolute deviation of the
projected reference values followed by a running maximum over directions.
NumPy's median copies and partitions for every call; the loops below select
in place in one reusable buffer.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _select(buf, kth):
    # Hoare selection with median-of-three pivot; partially reorders buf
    lo = 0
    hi = buf.shape[0] - 1
    while hi > lo:
        mid = (lo + hi) >> 1
        a = buf[lo]
        b = buf[mid]
        c = buf[hi]
        if a < b:
            if b < c:
                pivot = b
            elif a < c:
                pivot = c
            else:
                pivot = a
        else:
            if a < c:
                pivot = a
            elif b < c:
                pivot = c
            else:
                pivot = b
        i = lo
        j = hi
        while i <= j:
            while buf[i] < pivot:
                i += 1
            while buf[j] > pivot:
                j -= 1
            if i <= j:
                t = buf[i]
                buf[i] = buf[j]
                buf[j] = t
                i += 1
                j -= 1
        if kth <= j:
            hi = j
        elif kth >= i:
            lo = i
        else:
            return buf[kth]
    return buf[kth]


@njit(cache=True)
def median_inplace(buf):
    k = buf.shape[0]
    h = k // 2
    upper = _select(buf, h)
    if k % 2 == 1:
        return upper
    # after selection every entry below h is <= upper
    lower = buf[0]
    for i in range(1, h):
        if buf[i] > lower:
            lower = buf[i]
    return 0.5 * (lower + upper)


@njit(cache=True)
def projection_depth_subsets(ref_t, members, pts_t, robust):
    """Projection depth of every point against every reference subset.

    ref_t   : (K, M) projections of the reference pool, one row per direction
    members : (C, k) indices into the reference pool
    pts_t   : (K, N) projections of the evaluated points
    robust  : median/MAD when True, mean/SD (ddof=1) otherwise
    """
    n_dir = ref_t.shape[0]
    n_sub, k = members.shape
    n = pts_t.shape[1]
    out = np.empty((n_sub, n))
    buf = np.empty(k)
    worst = np.empty(n)
    for c in range(n_sub):
        worst[:] = 0.0
        for j in range(n_dir):
            row = ref_t[j]
            for i in range(k):
                buf[i] = row[members[c, i]]
            if robust:
                loc = median_inplace(buf)
                for i in range(k):
                    buf[i] = abs(buf[i] - loc)
                scale = median_inplace(buf)
            else:
                loc = 0.0
                for i in range(k):
                    loc += buf[i]
                loc /= k
                ss = 0.0
                for i in range(k):
                    ss += (buf[i] - loc) ** 2
                scale = np.sqrt(ss / (k - 1)) if k > 1 else 0.0
            prow = pts_t[j]
            if scale > 0.0:
                for p in range(n):
                    r = abs(prow[p] - loc) / scale
                    if r > worst[p]:
                        worst[p] = r
            else:
                for p in range(n):
                    if prow[p] != loc:
                        worst[p] = np.inf
        for p in range(n):
            out[c, p] = 1.0 / (1.0 + worst[p])
    return out
