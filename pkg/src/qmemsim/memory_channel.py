"""Phenomenological storage channel for streams and images.

Retrieval efficiency decays with storage time; retrieved signal clicks are
delayed by the storage time and mixed with uniform leakage noise from the
coupling laser. Images are attenuated and blurred by a Gaussian kernel as a
proxy for atomic diffusion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import InvalidArgument
from .spatial_modes import IntensityImage
from .streams import TimeTagStream, make_rng

NS_PER_S = 1e9
KERNEL_TRUNCATE = 4.0  # Gaussian kernel cut at 4 sigma, then renormalized


@dataclass(frozen=True)
class MemoryParams:
    eta0: float = 0.10
    decoherence_time: float = 348.0   # ns
    storage_time: float = 100.0       # ns
    noise_rate: float = 90000.0       # counts/s on the retrieved-signal detector
    blur_sigma: float = 0.035         # mm, about 5% of the l=1 ring radius
    decay: str = "exponential"        # or "gaussian"

    def __post_init__(self):
        if not 0.0 <= self.eta0 <= 1.0:
            raise InvalidArgument("eta0 must lie in [0, 1]")
        if not self.decoherence_time > 0:
            raise InvalidArgument("decoherence_time must be positive")
        if self.storage_time < 0 or self.noise_rate < 0 or self.blur_sigma < 0:
            raise InvalidArgument("storage_time, noise_rate and blur_sigma must be >= 0")
        if self.decay not in ("exponential", "gaussian"):
            raise InvalidArgument(f"unknown decay model {self.decay!r}")


def storage_efficiency(t, params: MemoryParams):
    """Retrieval efficiency after storing for ``t`` ns."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise InvalidArgument("storage time must be >= 0")
    x = t / params.decoherence_time
    eta = params.eta0 * (np.exp(-x) if params.decay == "exponential" else np.exp(-x * x))
    return float(eta) if eta.ndim == 0 else eta


def apply_storage_to_stream(stream: TimeTagStream, signal_channel: int, params: MemoryParams,
                            seed: int) -> TimeTagStream:
    """Thin, delay and add noise to the clicks of ``signal_channel``.

    Survivors are shifted by ``storage_time`` (rounded to whole ns). Noise is
    uniform over the stream's acquisition span.
    """
    rng = make_rng(seed)
    eta = storage_efficiency(params.storage_time, params)
    shift = int(round(params.storage_time))
    is_sig = stream.channels == signal_channel
    sig_t = stream.times[is_sig]
    keep = rng.random(sig_t.size) < eta
    sig_t = sig_t[keep] + shift

    span = stream.span_ns()
    t_start = int(stream.times[0]) if stream.duration_ns is None and len(stream) else 0
    n_noise = rng.poisson(params.noise_rate * span / NS_PER_S) if span > 0 else 0
    noise_t = t_start + np.floor(rng.random(n_noise) * span).astype(np.int64)

    if eta == 1.0 and shift == 0 and n_noise == 0:
        return stream
    times = np.concatenate([stream.times[~is_sig], sig_t, noise_t])
    channels = np.concatenate([
        stream.channels[~is_sig],
        np.full(sig_t.size + noise_t.size, signal_channel, dtype=np.int16),
    ])
    declared = tuple(set(stream.channel_set) | {signal_channel})
    return TimeTagStream.from_unsorted(channels, times, declared, stream.duration_ns)


def gaussian_blur(pixels: np.ndarray, sigma_px: float) -> np.ndarray:
    """Separable normalized Gaussian blur; reflective edges keep total power."""
    if sigma_px <= 0:
        return np.array(pixels, dtype=float, copy=True)
    return gaussian_filter(np.asarray(pixels, dtype=float), sigma_px, mode="reflect",
                           truncate=KERNEL_TRUNCATE)


def apply_storage_to_image(image: IntensityImage, params: MemoryParams) -> IntensityImage:
    eta = storage_efficiency(params.storage_time, params)
    blurred = gaussian_blur(image.pixels, params.blur_sigma / image.grid.pitch)
    return IntensityImage(image.grid, np.clip(eta * blurred, 0.0, None))


def retrieved_g2_peak(g_in_peak: float, signal_rate: float, params: MemoryParams) -> float:
    """Cross-correlation peak after storage, for a given pre-storage peak.

    True coincidences scale with the efficiency ``eta`` while the retrieved
    singles are ``eta * signal_rate + noise_rate``, so
    ``g_out - 1 = (g_in - 1) * eta * r / (eta * r + noise)``.
    """
    eta = storage_efficiency(params.storage_time, params)
    kept = eta * signal_rate
    if kept + params.noise_rate <= 0:
        raise InvalidArgument("nothing reaches the detector: zero efficiency and zero noise")
    return 1.0 + (g_in_peak - 1.0) * kept / (kept + params.noise_rate)


def noise_rate_for_peak(g_in_peak: float, g_out_peak: float, signal_rate: float,
                        params: MemoryParams) -> float:
    """Invert `retrieved_g2_peak` for the noise rate."""
    if not 1.0 < g_out_peak <= g_in_peak:
        raise InvalidArgument("need 1 < g_out_peak <= g_in_peak")
    eta = storage_efficiency(params.storage_time, params)
    ratio = (g_in_peak - 1.0) / (g_out_peak - 1.0)
    return eta * signal_rate * (ratio - 1.0)


__all__ = [
    "MemoryParams", "storage_efficiency", "apply_storage_to_stream", "apply_storage_to_image",
    "gaussian_blur", "retrieved_g2_peak", "noise_rate_for_peak",
]
