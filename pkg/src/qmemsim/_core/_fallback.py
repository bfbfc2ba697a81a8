"""Pure numpy implementations of the sliding-window kernels.

Same signatures and results as the compiled ``_kernels`` module.
"""

import numpy as np

# Pairs are materialised per chunk of `a` tags to bound memory.
_CHUNK = 1 << 16


def histogram_delays(ta, tb, lo, hi, bin_width, nbins):
    ta = np.asarray(ta, dtype=np.int64)
    tb = np.asarray(tb, dtype=np.int64)
    counts = np.zeros(nbins, dtype=np.int64)
    if ta.size == 0 or tb.size == 0:
        return counts
    # tb - ta < lo  <=>  tb < ta + lo ; integer tags so ceil() gives the left edge
    start = np.searchsorted(tb, ta + np.ceil(lo).astype(np.int64), side="left")
    stop = np.searchsorted(tb, ta + np.ceil(hi).astype(np.int64), side="left")
    for c0 in range(0, ta.size, _CHUNK):
        s = start[c0:c0 + _CHUNK]
        n = stop[c0:c0 + _CHUNK] - s
        total = int(n.sum())
        if total == 0:
            continue
        owner = np.repeat(np.arange(s.size), n)
        offsets = np.arange(total) - np.repeat(np.cumsum(n) - n, n)
        d = tb[s[owner] + offsets] - ta[c0:c0 + _CHUNK][owner]
        k = np.floor((d - lo) / bin_width).astype(np.int64)
        np.minimum(k, nbins - 1, out=k)
        counts += np.bincount(k, minlength=nbins)
    return counts


def window_hits(trig, ta, tb, lo, hi):
    trig = np.asarray(trig, dtype=np.int64)
    lo_i = np.ceil(lo).astype(np.int64)
    hi_i = np.ceil(hi).astype(np.int64)

    def hits(t):
        t = np.asarray(t, dtype=np.int64)
        if t.size == 0:
            return np.zeros(trig.size, dtype=bool)
        return np.searchsorted(t, trig + hi_i) > np.searchsorted(t, trig + lo_i)

    hit_a = hits(ta)
    hit_b = hits(tb)
    return (int(trig.size), int(hit_a.sum()), int(hit_b.sum()),
            int(np.count_nonzero(hit_a & hit_b)))
