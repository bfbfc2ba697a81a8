"""Coincidence statistics from time-tag streams.

Histograms count every (a, b) tag pair whose delay ``t_b - t_a`` falls in the
requested range (start-multistop), so the accidental floor is exactly
``N_a * N_b * bin_width / duration``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import _core
from .errors import (IllConditionedFit, InsufficientStatistics, InvalidArgument,
                     UndefinedNormalization)
from .streams import TimeTagStream

NS_PER_S = 1e9
COINCIDENCE_WINDOW_NS = 50.0
THERMAL_AUTO_G2 = 2.0


@dataclass(frozen=True)
class CoincidenceHistogram:
    bin_width: float
    bins: np.ndarray
    delay_range: tuple[float, float]
    total_pairs_examined: int

    @property
    def tau(self) -> np.ndarray:
        """Left edge of every bin (ns)."""
        return self.delay_range[0] + self.bin_width * np.arange(self.bins.size)

    def rebin(self, factor: int) -> "CoincidenceHistogram":
        factor = int(factor)
        if factor < 1 or self.bins.size % factor:
            raise InvalidArgument(f"cannot rebin {self.bins.size} bins by {factor}")
        return CoincidenceHistogram(self.bin_width * factor,
                                    self.bins.reshape(-1, factor).sum(axis=1),
                                    self.delay_range, self.total_pairs_examined)


@dataclass(frozen=True)
class G2Curve:
    tau: np.ndarray
    g: np.ndarray
    stderr: np.ndarray

    def peak(self) -> tuple[float, float, float]:
        i = int(np.argmax(self.g))
        return float(self.tau[i]), float(self.g[i]), float(self.stderr[i])

    def at(self, tau: float) -> tuple[float, float]:
        """(g, stderr) of the bin containing ``tau``."""
        width = self.tau[1] - self.tau[0] if self.tau.size > 1 else 1.0
        i = int(math.floor((tau - self.tau[0]) / width))
        if not 0 <= i < self.tau.size:
            raise InvalidArgument(f"tau={tau} outside the curve")
        return float(self.g[i]), float(self.stderr[i])


@dataclass(frozen=True)
class DecayFit:
    A: float
    T: float
    g0: float
    residual_norm: float

    def __call__(self, t):
        return self.A * np.exp(-np.asarray(t, dtype=float) / self.T) + self.g0

    def to_json(self) -> str:
        return json.dumps({"A": self.A, "T_ns": self.T, "g0": self.g0,
                           "residual_norm": self.residual_norm}, indent=2)


@dataclass(frozen=True)
class AlphaCounts:
    P1: int
    P12: int
    P13: int
    P123: int

    @property
    def alpha(self) -> float:
        return anti_correlation_alpha(self.P1, self.P12, self.P13, self.P123)

    @property
    def stderr(self) -> float:
        """Poisson error of alpha by first-order propagation.

        With ``P123 = 0`` the error of a zero count is taken as one event.
        """
        a = self.alpha
        if self.P123 == 0:
            return self.P1 / (self.P12 * self.P13)
        rel2 = 1.0 / self.P123 + 1.0 / self.P12 + 1.0 / self.P13 + 1.0 / max(self.P1, 1)
        return a * math.sqrt(rel2)


# ---------------------------------------------------------------------------


def _channel_times(stream: TimeTagStream, ch: int, strict: bool = True) -> np.ndarray:
    if strict:
        return stream.channel_times(ch)
    return np.ascontiguousarray(stream.times[stream.channels == ch])


def coincidence_histogram(stream: TimeTagStream, ch_a: int, ch_b: int, bin_width: float = 1.0,
                          delay_range: tuple[float, float] = (-100.0, 300.0)) -> CoincidenceHistogram:
    """Histogram of delays ``t_b - t_a`` over all tag pairs, in a single sliding pass."""
    lo, hi = float(delay_range[0]), float(delay_range[1])
    if not bin_width >= 1:
        raise InvalidArgument(f"bin_width must be >= 1 ns, got {bin_width}")
    if not hi > lo:
        raise InvalidArgument(f"empty delay range {delay_range}")
    nbins_f = (hi - lo) / bin_width
    nbins = int(round(nbins_f))
    if abs(nbins - nbins_f) > 1e-9 * max(1.0, nbins_f):
        raise InvalidArgument("delay range must span a whole number of bins")
    ta = _channel_times(stream, ch_a)
    tb = _channel_times(stream, ch_b)
    bins = _core.histogram_delays(ta, tb, lo, hi, float(bin_width), nbins)
    return CoincidenceHistogram(float(bin_width), bins, (lo, hi), int(bins.sum()))


def normalize_g2(hist: CoincidenceHistogram, singles_a: int, singles_b: int,
                 duration: float) -> G2Curve:
    """Divide coincidences by the accidental level ``N_a N_b bin_width / duration``."""
    if singles_a <= 0 or singles_b <= 0:
        raise UndefinedNormalization(f"singles must be positive (got {singles_a}, {singles_b})")
    if not duration > 0:
        raise InvalidArgument(f"duration must be positive, got {duration}")
    accidental = singles_a * singles_b * (hist.bin_width / NS_PER_S) / duration
    counts = hist.bins.astype(float)
    return G2Curve(hist.tau, counts / accidental, np.sqrt(counts) / accidental)


def g2_from_stream(stream: TimeTagStream, ch_a: int, ch_b: int, bin_width: float = 1.0,
                   delay_range: tuple[float, float] = (-100.0, 300.0),
                   duration: float | None = None) -> G2Curve:
    """Histogram and normalize in one step; duration defaults to the stream span."""
    hist = coincidence_histogram(stream, ch_a, ch_b, bin_width, delay_range)
    if duration is None:
        duration = stream.span_ns() / NS_PER_S
    return normalize_g2(hist, stream.count(ch_a), stream.count(ch_b), duration)


def cauchy_schwarz_R(g_cross_peak: float, g_auto_a: float = THERMAL_AUTO_G2,
                     g_auto_b: float = THERMAL_AUTO_G2) -> float:
    """``g_cross**2 / (g_auto_a * g_auto_b)``; above 1 the pair is nonclassical."""
    if g_auto_a <= 0 or g_auto_b <= 0:
        raise InvalidArgument("auto-correlations must be positive")
    return g_cross_peak ** 2 / (g_auto_a * g_auto_b)


def anti_correlation_alpha(P1, P12, P13, P123) -> float:
    """``P1 * P123 / (P12 * P13)``: 0 for an ideal single photon, >= 1 classically."""
    if P12 <= 0 or P13 <= 0:
        raise InsufficientStatistics(f"need twofold coincidences on both arms (P12={P12}, P13={P13})")
    return P1 * P123 / (P12 * P13)


def alpha_counts(stream: TimeTagStream, trigger: int, a: int, b: int,
                 window: float = COINCIDENCE_WINDOW_NS, delay: float = 0.0) -> AlphaCounts:
    """Detection counts for the heralded HBT test.

    Every trigger opens a window ``[delay - window/2, delay + window/2)`` ns;
    P12 (P13) counts triggers with at least one ``a`` (``b``) click inside,
    P123 those with both.
    """
    if not window > 0:
        raise InvalidArgument("window must be positive")
    trig = _channel_times(stream, trigger)
    lo = delay - window / 2.0
    hi = delay + window / 2.0
    p1, p12, p13, p123 = _core.window_hits(trig, _channel_times(stream, a, strict=False),
                                           _channel_times(stream, b, strict=False), lo, hi)
    return AlphaCounts(p1, p12, p13, p123)


def measure_alpha(stream: TimeTagStream, trigger: int, a: int, b: int,
                  window: float = COINCIDENCE_WINDOW_NS, delay: float = 0.0) -> float:
    return alpha_counts(stream, trigger, a, b, window, delay).alpha


def estimate_auto_g2(stream: TimeTagStream, a: int, b: int, window: float = 10.0,
                     duration: float | None = None) -> tuple[float, float]:
    """Unheralded zero-delay correlation between the two HBT outputs.

    Cross-check for the thermal value used by `cauchy_schwarz_R`; returns
    (g, stderr) over delays in ``[-window/2, window/2)``.
    """
    hist = coincidence_histogram(stream, a, b, 1.0, (-window / 2.0, window / 2.0))
    if duration is None:
        duration = stream.span_ns() / NS_PER_S
    curve = normalize_g2(hist.rebin(hist.bins.size), stream.count(a), stream.count(b), duration)
    return float(curve.g[0]), float(curve.stderr[0])


def windowed_peak(curve: G2Curve, start: float, width: float,
                  decay_time: float) -> tuple[float, float]:
    """Peak of an exponentially falling correlation from a window of bins.

    Single 1 ns bins carry too few counts once the retrieved signal is weak,
    so the peak is estimated from ``width`` ns after ``start`` assuming the
    excess ``g - 1`` falls as ``exp(-(tau - start) / decay_time)``:
    ``g_peak - 1 = sum(g_i - 1) / sum(w_i)`` with ``w_i`` the decay weights.
    Returns (g_peak, stderr).
    """
    if not width > 0 or not decay_time > 0:
        raise InvalidArgument("width and decay_time must be positive")
    sel = (curve.tau >= start) & (curve.tau < start + width)
    if not np.any(sel):
        raise InvalidArgument(f"window [{start}, {start + width}) lies outside the curve")
    w = np.exp(-(curve.tau[sel] - start) / decay_time)
    excess = float(np.sum(curve.g[sel] - 1.0))
    err = float(np.sqrt(np.sum(curve.stderr[sel] ** 2)))
    return 1.0 + excess / float(w.sum()), err / float(w.sum())


# ---------------------------------------------------------------------------
# decay fit

def fit_exponential_decay(points) -> DecayFit:
    """Least-squares fit of ``g(t) = A exp(-t/T) + g0`` (Levenberg-Marquardt).

    ``points`` is an iterable of ``(t, g, stderr)``; a non-positive stderr on
    any point switches to unweighted residuals. Starts from
    ``A = g(first) - g(last)``, ``g0 = g(last)``, ``T = span / 2``.
    """
    arr = np.asarray(list(points), dtype=float)
    if arr.ndim != 2 or arr.shape[1] not in (2, 3):
        raise InvalidArgument("points must be (t, g[, stderr]) rows")
    if arr.shape[0] < 4:
        raise InvalidArgument(f"need at least 4 points, got {arr.shape[0]}")
    arr = arr[np.argsort(arr[:, 0], kind="stable")]
    t, g = arr[:, 0], arr[:, 1]
    sigma = arr[:, 2] if arr.shape[1] == 3 else np.zeros_like(g)
    span = t[-1] - t[0]
    if not span > 0 or np.unique(t).size < 3:
        raise IllConditionedFit("need at least 3 distinct times to constrain T", parameter="T")

    spread = float(np.ptp(g))
    tol = float(np.max(sigma)) if np.all(sigma > 0) else 1e-12 * max(1.0, float(np.max(np.abs(g))))
    if spread <= tol:
        raise IllConditionedFit("data are constant within errors: amplitude A is consistent "
                                "with zero, so the decay time T is unconstrained", parameter="T")

    w = 1.0 / sigma if np.all(sigma > 0) else np.ones_like(g)

    def resid(p):
        A, T, g0 = p
        return (A * np.exp(-t / T) + g0 - g) * w

    def jac(p):
        A, T, g0 = p
        e = np.exp(-t / T)
        return np.column_stack([e, A * t * e / T ** 2, np.ones_like(t)]) * w[:, None]

    p0 = np.array([g[0] - g[-1], span / 2.0, g[-1]])
    sol = least_squares(resid, p0, jac=jac, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=20000, x_scale="jac")
    A, T, g0 = (float(v) for v in sol.x)
    if not (math.isfinite(T) and T > 0):
        raise IllConditionedFit(f"fit diverged (T={T})", parameter="T")
    s = np.linalg.svd(jac(sol.x), compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        _, _, vt = np.linalg.svd(jac(sol.x))
        name = ("A", "T", "g0")[int(np.argmax(np.abs(vt[-1])))]
        raise IllConditionedFit(f"parameter {name} is not constrained by the data", parameter=name)
    residual = float(np.linalg.norm(A * np.exp(-t / T) + g0 - g))
    return DecayFit(A, T, g0, residual)


# ---------------------------------------------------------------------------
# export

def write_histogram_csv(hist: CoincidenceHistogram, path) -> None:
    with open(path, "w") as fh:
        fh.write("tau_ns,counts\n")
        for tau, c in zip(hist.tau, hist.bins):
            fh.write(f"{tau:.6g},{int(c)}\n")


def write_g2_csv(curve: G2Curve, path) -> None:
    with open(path, "w") as fh:
        fh.write("tau_ns,g,stderr\n")
        for tau, g, s in zip(curve.tau, curve.g, curve.stderr):
            fh.write(f"{tau:.6g},{g:.10g},{s:.10g}\n")


def write_decay_fit_json(fit: DecayFit, path) -> None:
    with open(path, "w") as fh:
        fh.write(fit.to_json() + "\n")
