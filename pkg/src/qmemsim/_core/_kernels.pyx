# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sliding-window kernels over sorted int64 time tags."""

import numpy as np

cimport numpy as cnp
from libc.math cimport floor
from libc.stdint cimport int64_t

cnp.import_array()


def histogram_delays(const int64_t[::1] ta, const int64_t[::1] tb,
                     double lo, double hi, double bin_width, Py_ssize_t nbins):
    """Count every (a, b) pair with ``lo <= tb - ta < hi`` into ``nbins`` bins."""
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.zeros(nbins, dtype=np.int64)
    cdef int64_t[::1] counts = out
    cdef Py_ssize_t na = ta.shape[0], nb = tb.shape[0]
    cdef Py_ssize_t i, j, j0 = 0, k
    cdef double d
    with nogil:
        for i in range(na):
            while j0 < nb and <double>(tb[j0] - ta[i]) < lo:
                j0 += 1
            j = j0
            while j < nb:
                d = <double>(tb[j] - ta[i])
                if d >= hi:
                    break
                k = <Py_ssize_t>floor((d - lo) / bin_width)
                if k >= nbins:
                    k = nbins - 1
                counts[k] += 1
                j += 1
    return out


def window_hits(const int64_t[::1] trig, const int64_t[::1] ta, const int64_t[::1] tb,
                double lo, double hi):
    """Return (P1, P12, P13, P123) for windows ``[t + lo, t + hi)`` around each trigger."""
    cdef Py_ssize_t nt = trig.shape[0], na = ta.shape[0], nb = tb.shape[0]
    cdef Py_ssize_t i, ja = 0, jb = 0
    cdef long long p12 = 0, p13 = 0, p123 = 0
    cdef bint hit_a, hit_b
    with nogil:
        for i in range(nt):
            while ja < na and <double>(ta[ja] - trig[i]) < lo:
                ja += 1
            while jb < nb and <double>(tb[jb] - trig[i]) < lo:
                jb += 1
            hit_a = ja < na and <double>(ta[ja] - trig[i]) < hi
            hit_b = jb < nb and <double>(tb[jb] - trig[i]) < hi
            if hit_a:
                p12 += 1
            if hit_b:
                p13 += 1
            if hit_a and hit_b:
                p123 += 1
    return int(nt), int(p12), int(p13), int(p123)
