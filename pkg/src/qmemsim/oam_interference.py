"""Polarization-OAM hybrid states and the rotating four-spot interference.

The stored state is ``(|H>|+l> + |V>|-l>)/sqrt2``. After the memory a
quarter-wave plate at 45 degrees gives ``(|L>|+l> + i|R>|-l>)/sqrt2``; a
half-wave plate at ``theta`` and projection on the V port leave the OAM
superposition ``(exp(-2i theta)|-l> + i exp(2i theta)|+l>)/sqrt2`` (up to a
global phase). The resulting pattern is ``1 - sin(2 l phi + 4 theta)`` on an
LG ring: ``2|l|`` lobes that rotate by ``-2 dtheta / l`` when the plate turns
by ``dtheta``.

Coefficient order everywhere is ``(H,+l), (H,-l), (V,+l), (V,-l)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import map_coordinates

from .errors import InvalidArgument, InvalidData
from .polarization import ChannelParams, hwp, prepare_state, qwp
from .spatial_modes import IntensityImage, TransverseGrid, lg_mode
from .streams import make_rng

ANALYZER_PORT = "V"
DEFAULT_WAIST_MM = 1.0


@dataclass(frozen=True)
class HybridState:
    coefficients: np.ndarray
    l: int

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex).reshape(4)
        if int(self.l) < 1:
            raise InvalidArgument(f"l must be a positive integer, got {self.l}")
        if abs(np.vdot(c, c).real - 1.0) > 1e-10:
            raise InvalidArgument("hybrid state must be normalized")
        object.__setattr__(self, "coefficients", c)

    def as_matrix(self) -> np.ndarray:
        """2x2 array indexed [polarization, oam] with oam order (+l, -l)."""
        return self.coefficients.reshape(2, 2)

    def density_matrix(self) -> np.ndarray:
        return np.outer(self.coefficients, self.coefficients.conj())

    def polarization_reduced(self) -> np.ndarray:
        m = self.as_matrix()
        return m @ m.conj().T


def prepare_eq1(l: int) -> HybridState:
    """``(|H>|+l> + |V>|-l>) / sqrt2``."""
    if int(l) < 1:
        raise InvalidArgument("l must be >= 1; l = 0 makes the superposition degenerate")
    s = 1.0 / math.sqrt(2.0)
    return HybridState(np.array([s, 0.0, 0.0, s], dtype=complex), int(l))


def _check_unitary(plate) -> np.ndarray:
    u = np.asarray(plate, dtype=complex)
    if u.shape != (2, 2) or np.max(np.abs(u.conj().T @ u - np.eye(2))) > 1e-8:
        raise InvalidArgument("waveplate matrix must be a 2x2 unitary")
    return u


def apply_waveplate(state: HybridState, plate) -> HybridState:
    """Act with a polarization unitary, identity on the OAM factor."""
    u = _check_unitary(plate)
    return HybridState((u @ state.as_matrix()).reshape(4), state.l)


def analyzer_oam_amplitudes(state: HybridState, theta: float) -> np.ndarray:
    """Unnormalized OAM amplitudes (c_{+l}, c_{-l}) after QWP(45), HWP(theta), V port."""
    s = apply_waveplate(apply_waveplate(state, qwp(math.pi / 4.0)), hwp(theta))
    port = prepare_state(ANALYZER_PORT).amplitudes
    return port.conj() @ s.as_matrix()


def _pattern_from_oam(c_plus: complex, c_minus: complex, l: int, grid: TransverseGrid,
                      waist: float) -> np.ndarray:
    field = c_plus * lg_mode(l, waist, grid).amplitude + c_minus * lg_mode(-l, waist, grid).amplitude
    return np.abs(field) ** 2


def project_and_pattern(state: HybridState, theta: float, grid: TransverseGrid,
                        waist: float = DEFAULT_WAIST_MM) -> IntensityImage:
    """Intensity behind the analyzer for HWP angle ``theta`` (radians)."""
    c_plus, c_minus = analyzer_oam_amplitudes(state, theta)
    return IntensityImage(grid, _pattern_from_oam(c_plus, c_minus, state.l, grid, waist))


def mixed_pattern(rho: np.ndarray, l: int, theta: float, grid: TransverseGrid,
                  waist: float = DEFAULT_WAIST_MM) -> IntensityImage:
    """Pattern for a mixed hybrid state given as a 4x4 density matrix."""
    u = np.kron(hwp(theta) @ qwp(math.pi / 4.0), np.eye(2))
    r = u @ rho @ u.conj().T
    port = np.kron(prepare_state(ANALYZER_PORT).amplitudes.conj(), np.eye(2))
    r_oam = port @ r @ port.conj().T
    modes = np.stack([lg_mode(l, waist, grid).amplitude, lg_mode(-l, waist, grid).amplitude])
    img = np.einsum("ij,iyx,jyx->yx", r_oam, modes, modes.conj()).real
    return IntensityImage(grid, np.clip(img, 0.0, None))


def sagnac_hybrid_channel(state: HybridState, ch: ChannelParams) -> np.ndarray:
    """Apply the dual-rail storage noise to the polarization factor of a hybrid state.

    Phase jitter damps the coherence between the H and V rails; the
    depolarizing part replaces the polarization by I/2 and keeps the OAM
    marginal.
    """
    rho = state.density_matrix().reshape(2, 2, 2, 2)  # [p, o, p', o']
    damp = math.exp(-ch.phase_noise_sigma ** 2 / 2.0)
    rho = rho.copy()
    rho[0, :, 1, :] *= damp
    rho[1, :, 0, :] *= damp
    oam_marginal = np.einsum("pipj->ij", rho)
    depol = np.einsum("pq,ij->piqj", np.eye(2) / 2.0, oam_marginal)
    out = (1.0 - ch.depolarization) * rho + ch.depolarization * depol
    return out.reshape(4, 4)


def count_lobes(image: IntensityImage, radius_mm: float, samples: int = 720) -> int:
    """Number of local maxima of the intensity around a circle of given radius."""
    g = image.grid
    phi = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    cols = radius_mm * np.cos(phi) / g.pitch + (g.width - 1) / 2.0
    rows = (g.height - 1) / 2.0 - radius_mm * np.sin(phi) / g.pitch
    ring = map_coordinates(image.pixels, [rows, cols], order=3, mode="nearest")
    prev, nxt = np.roll(ring, 1), np.roll(ring, -1)
    thresh = ring.min() + 0.5 * (ring.max() - ring.min())
    return int(np.count_nonzero((ring > prev) & (ring >= nxt) & (ring > thresh)))


def rotate_image(image: IntensityImage, angle: float) -> np.ndarray:
    """Rigid rotation about the grid center by ``angle`` (radians, counter-clockwise)."""
    g = image.grid
    x, y = g.coordinates()
    c, s = math.cos(angle), math.sin(angle)
    # sample the source at the inverse-rotated position
    xs = c * x + s * y
    ys = -s * x + c * y
    cols = xs / g.pitch + (g.width - 1) / 2.0
    rows = (g.height - 1) / 2.0 - ys / g.pitch
    return map_coordinates(image.pixels, [rows, cols], order=3, mode="constant", cval=0.0)


def spot_counts(theta, azimuth0: float, noise_floor: float, l: int = 2):
    """Relative count rate in the spot at azimuth ``azimuth0`` versus HWP angle.

    ``(1 - V sin(4 theta + 2 l azimuth0)) / 2`` with ``V = 1 - noise_floor``;
    the period in ``theta`` is pi/2.
    """
    if not 0.0 <= noise_floor < 1.0:
        raise InvalidArgument("noise_floor must lie in [0, 1)")
    theta = np.asarray(theta, dtype=float)
    v = 1.0 - noise_floor
    out = 0.5 * (1.0 - v * np.sin(4.0 * theta + 2.0 * l * azimuth0))
    return float(out) if out.ndim == 0 else out


def fit_fringe(samples) -> tuple[float, float, float]:
    """Least-squares ``c0 + c1 sin(4 theta + phi0)``; returns (c0, c1, phi0)."""
    arr = np.asarray(list(samples), dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 8:
        raise InvalidArgument("need at least 8 (theta, counts) samples")
    theta, y = arr[:, 0], arr[:, 1]
    phases = np.unique(np.round(np.mod(4.0 * theta, 2.0 * math.pi), 9))
    if phases.size < 3:
        raise InvalidArgument("samples must cover at least 3 distinct fringe phases")
    design = np.column_stack([np.ones_like(theta), np.sin(4 * theta), np.cos(4 * theta)])
    (c0, a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(c0), float(math.hypot(a, b)), float(math.atan2(b, a))


def fringe_visibility(samples) -> float:
    """``|c1| / c0`` of the sinusoidal fit."""
    c0, c1, _ = fit_fringe(samples)
    if c0 <= 0:
        raise InvalidData(f"fringe offset c0 = {c0} is not positive")
    return c1 / c0


def simulate_fringe(thetas, signal_counts: float, background_counts: float, coherence: float,
                    seed: int, azimuth0: float = math.pi / 8.0, l: int = 2) -> np.ndarray:
    """Poisson coincidence counts in one spot for each HWP angle.

    ``signal_counts`` is the mean number of heralded photons in the spot per
    setting averaged over the fringe, ``coherence`` the surviving
    polarization coherence, ``background_counts`` the flat accidental level.
    """
    mean = signal_counts * (1.0 - coherence * np.sin(4.0 * np.asarray(thetas) + 2.0 * l * azimuth0))
    mean = mean + background_counts
    return make_rng(seed).poisson(mean).astype(float)


def write_fringe_csv(thetas_rad, counts, path) -> None:
    with open(path, "w") as fh:
        fh.write("theta_deg,counts\n")
        for t, c in zip(thetas_rad, counts):
            fh.write(f"{math.degrees(t):.4f},{c:.10g}\n")
