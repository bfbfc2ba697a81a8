"""Hot sliding-window kernels, compiled when available.

The Cython extension ``_kernels`` is used if it was built; otherwise the
numpy implementation in ``_fallback`` is selected at import. Set
``QMEMSIM_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _fallback

if os.environ.get("QMEMSIM_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"



def _times(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def histogram_delays(ta, tb, lo, hi, bin_width, nbins):
    """Counts of ``tb - ta`` delays in ``nbins`` bins over ``[lo, hi)``; inputs sorted."""
    return np.asarray(_impl.histogram_delays(_times(ta), _times(tb), float(lo), float(hi),
                                             float(bin_width), int(nbins)), dtype=np.int64)


def window_hits(trig, ta, tb, lo, hi):
    """(P1, P12, P13, P123) for windows ``[t + lo, t + hi)`` after every trigger."""
    return tuple(int(v) for v in _impl.window_hits(_times(trig), _times(ta), _times(tb),
                                                   float(lo), float(hi)))

__all__ = ["BACKEND", "histogram_delays", "window_hits"]
