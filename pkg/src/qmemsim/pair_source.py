"""Monte Carlo time tags from a heralded photon-pair source.

Pairs are a homogeneous Poisson process. Each pair yields a trigger click at
the (integer-ns) emission time and a signal click delayed by
``floor(delay_offset + Exp(coherence_time))``, each thinned by its detector
efficiency. Independent Poisson background is added on both channels.

Because the delay is floored independently of the emission time, the expected
number of true pairs in the 1 ns delay bin ``[k, k+1)`` is exactly the integral
of the continuous one-sided exponential density over that bin; `analytic_g2`
with ``bin_width`` reproduces histogram expectations exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument, NoSolution, UndefinedNormalization
from .streams import SIGNAL, TRIGGER, TimeTagStream, make_rng

NS_PER_S = 1e9

PEAK_DELAY_NS = 19.0
CROSS_FWHM_NS = 32.5
# one-sided exponential: FWHM = tau_c * ln 2
COHERENCE_TIME_NS = CROSS_FWHM_NS / math.log(2.0)
DETECTOR_EFFICIENCY = 0.5


@dataclass(frozen=True)
class SourceParams:
    pair_rate: float = 0.0               # pairs/s at the source
    delay_offset: float = PEAK_DELAY_NS  # ns
    coherence_time: float = COHERENCE_TIME_NS  # ns
    background_rate_trigger: float = 500.0  # counts/s
    background_rate_signal: float = 500.0   # counts/s
    det_eff_trigger: float = DETECTOR_EFFICIENCY
    det_eff_signal: float = DETECTOR_EFFICIENCY

    def __post_init__(self):
        for name in ("pair_rate", "background_rate_trigger", "background_rate_signal"):
            if getattr(self, name) < 0 or not math.isfinite(getattr(self, name)):
                raise InvalidArgument(f"{name} must be a finite rate >= 0")
        for name in ("det_eff_trigger", "det_eff_signal"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidArgument(f"{name} must lie in [0, 1]")
        if not self.coherence_time > 0:
            raise InvalidArgument("coherence_time must be positive")

    @property
    def singles_trigger(self) -> float:
        """Detected trigger singles rate (counts/s)."""
        return self.pair_rate * self.det_eff_trigger + self.background_rate_trigger

    @property
    def singles_signal(self) -> float:
        return self.pair_rate * self.det_eff_signal + self.background_rate_signal

    @property
    def coincidence_rate(self) -> float:
        """Rate of true (same-pair) trigger-signal detections."""
        return self.pair_rate * self.det_eff_trigger * self.det_eff_signal


def delay_density(tau, params: SourceParams, bin_width: float | None = None):
    """Normalized trigger-to-signal delay density (1/ns).

    With ``bin_width`` the density is averaged over ``[tau, tau + bin_width)``.
    """
    tau = np.asarray(tau, dtype=float)
    t0, tc = params.delay_offset, params.coherence_time
    if bin_width is None:
        x = np.maximum(tau - t0, 0.0)
        return np.where(tau >= t0, np.exp(-x / tc) / tc, 0.0)
    if not bin_width > 0:
        raise InvalidArgument("bin_width must be positive")

    def cdf(t):
        return -np.expm1(-np.maximum(t - t0, 0.0) / tc)

    return (cdf(tau + bin_width) - cdf(tau)) / bin_width


def analytic_g2(tau, params: SourceParams, bin_width: float | None = None):
    """Expected normalized cross-correlation between trigger and signal.

    ``g(tau) = 1 + R_c * f(tau) / (r_1 * r_2)`` with ``R_c`` the true
    coincidence rate, ``f`` the delay density and ``r_i`` the singles rates.
    Exact for a Poisson pair process.
    """
    r1, r2 = params.singles_trigger, params.singles_signal
    if r1 <= 0 or r2 <= 0:
        raise UndefinedNormalization(f"singles rates must be nonzero (trigger {r1}, signal {r2})")
    f = delay_density(tau, params, bin_width) * NS_PER_S
    g = 1.0 + params.coincidence_rate * f / (r1 * r2)
    return float(g) if np.ndim(g) == 0 else g


def calibrate_to_peak(target_peak: float, fixed: SourceParams,
                      bin_width: float | None = None) -> SourceParams:
    """Choose ``pair_rate`` so that ``analytic_g2(delay_offset) == target_peak``.

    The peak is quadratic in the pair rate; of the two roots the larger
    (multi-pair limited) one is returned. ``fixed.pair_rate`` is ignored.
    """
    if not target_peak > 1:
        raise InvalidArgument(f"target peak must exceed 1, got {target_peak}")
    e1, e2 = fixed.det_eff_trigger, fixed.det_eff_signal
    b1, b2 = fixed.background_rate_trigger, fixed.background_rate_signal
    c = float(delay_density(fixed.delay_offset, fixed, bin_width)) * NS_PER_S
    k = target_peak - 1.0
    qa = k * e1 * e2
    qb = k * (e1 * b2 + e2 * b1) - e1 * e2 * c
    qc = k * b1 * b2
    if qa == 0:
        raise NoSolution("zero detection efficiency: no correlated coincidences possible")
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0:
        # g - 1 is maximal at R* = sqrt(b1 b2 / (e1 e2))
        r_star = math.sqrt(b1 * b2 / (e1 * e2))
        best = 1.0 + e1 * e2 * c * r_star / ((e1 * r_star + b1) * (e2 * r_star + b2))
        raise NoSolution(f"peak {target_peak} unreachable with these backgrounds (max {best:.6g})")
    # numerically stable larger root
    if qb <= 0:
        rate = (-qb + math.sqrt(disc)) / (2.0 * qa)
    else:
        rate = 2.0 * qc / (-qb - math.sqrt(disc))
    if not rate > 0 or not math.isfinite(rate):
        raise NoSolution(f"no positive pair rate reaches peak {target_peak}")
    return replace(fixed, pair_rate=rate)


def paper_source(target_peak: float = 200.0, **overrides) -> SourceParams:
    """Source calibrated so the 1 ns-binned cross-correlation peaks at ``target_peak``."""
    return calibrate_to_peak(target_peak, SourceParams(**overrides), bin_width=1.0)


def simulate_timetags(params: SourceParams, duration: float, seed: int,
                      trigger_channel: int = TRIGGER,
                      signal_channel: int = SIGNAL) -> TimeTagStream:
    """Simulate ``duration`` seconds of detector clicks.

    Tags land in ``[0, duration)`` ns; signal partners falling past the end
    are dropped. Identical (params, duration, seed) give identical streams.
    """
    if not duration > 0:
        raise InvalidArgument(f"duration must be positive, got {duration}")
    span = int(round(duration * NS_PER_S))
    rng = make_rng(seed)

    n_pairs = rng.poisson(params.pair_rate * duration)
    emit = np.floor(rng.random(n_pairs) * span).astype(np.int64)
    keep_t = rng.random(n_pairs) < params.det_eff_trigger
    keep_s = rng.random(n_pairs) < params.det_eff_signal
    delay = np.floor(params.delay_offset + rng.exponential(params.coherence_time, n_pairs))
    sig = emit + delay.astype(np.int64)

    n_bt = rng.poisson(params.background_rate_trigger * duration)
    bg_t = np.floor(rng.random(n_bt) * span).astype(np.int64)
    n_bs = rng.poisson(params.background_rate_signal * duration)
    bg_s = np.floor(rng.random(n_bs) * span).astype(np.int64)

    trig_times = np.concatenate([emit[keep_t], bg_t])
    sig_times = np.concatenate([sig[keep_s], bg_s])
    sig_times = sig_times[(sig_times >= 0) & (sig_times < span)]

    times = np.concatenate([trig_times, sig_times])
    channels = np.concatenate([
        np.full(trig_times.size, trigger_channel, dtype=np.int16),
        np.full(sig_times.size, signal_channel, dtype=np.int16),
    ])
    return TimeTagStream.from_unsorted(channels, times, (trigger_channel, signal_channel), span)


def hbt_split(stream: TimeTagStream, signal_channel: int, out_a: int, out_b: int,
              seed: int) -> TimeTagStream:
    """Route each ``signal_channel`` tag to ``out_a`` or ``out_b`` with probability 1/2."""
    rng = make_rng(seed)
    mask = stream.channels == signal_channel
    n = int(mask.sum())
    channels = stream.channels.copy()
    channels[mask] = np.where(rng.random(n) < 0.5, out_a, out_b).astype(np.int16)
    declared = {c for c in stream.channel_set if c != signal_channel} | {out_a, out_b}
    return TimeTagStream(channels, stream.times, tuple(declared), stream.duration_ns,
                         _sorted_checked=True)
