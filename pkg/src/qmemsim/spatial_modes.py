"""Transverse fields carrying orbital angular momentum, and image metrics.

Coordinates are measured from the grid center ``((W-1)/2, (H-1)/2)`` in
pixels, with x to the right and y upward, so the azimuth ``phi = atan2(y, x)``
runs counter-clockwise on the displayed image. On even-sized grids the center
falls between pixels and no sample sits on the phase singularity.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, UndefinedSimilarity, UndefinedVisibility


@dataclass(frozen=True)
class TransverseGrid:
    width: int = 128
    height: int = 128
    pitch: float = 0.033  # mm per pixel; puts an l=1, w=1 mm ring across ~1/3 of the frame

    def __post_init__(self):
        if int(self.width) < 1 or int(self.height) < 1:
            raise InvalidArgument(f"grid must be at least 1x1, got {self.width}x{self.height}")
        if not self.pitch > 0:
            raise InvalidArgument(f"pitch must be positive, got {self.pitch}")

    @property
    def shape(self) -> tuple[int, int]:
        return (int(self.height), int(self.width))

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical (x, y) in mm for every pixel, each of shape (height, width)."""
        cx = (self.width - 1) / 2.0
        cy = (self.height - 1) / 2.0
        x = (np.arange(self.width) - cx) * self.pitch
        y = (cy - np.arange(self.height)) * self.pitch
        return np.meshgrid(x, y)

    def polar(self) -> tuple[np.ndarray, np.ndarray]:
        x, y = self.coordinates()
        return np.hypot(x, y), np.arctan2(y, x)

    def row_positions(self) -> np.ndarray:
        """x positions (mm) along a row, as used by transverse scans."""
        return (np.arange(self.width) - (self.width - 1) / 2.0) * self.pitch


@dataclass(frozen=True)
class SpatialField:
    grid: TransverseGrid
    amplitude: np.ndarray
    oam_label: int | None = None

    def __post_init__(self):
        a = np.asarray(self.amplitude, dtype=complex)
        if a.shape != self.grid.shape:
            raise InvalidArgument(f"amplitude shape {a.shape} does not match grid {self.grid.shape}")
        object.__setattr__(self, "amplitude", a)

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.amplitude) ** 2))

    def inner(self, other: "SpatialField") -> complex:
        """Overlap <self|other> summed over pixels."""
        return complex(np.vdot(self.amplitude, other.amplitude))


@dataclass(frozen=True)
class IntensityImage:
    grid: TransverseGrid
    pixels: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.pixels, dtype=float)
        if p.shape != self.grid.shape:
            raise InvalidArgument(f"pixel shape {p.shape} does not match grid {self.grid.shape}")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise InvalidArgument("intensity pixels must be finite and non-negative")
        object.__setattr__(self, "pixels", p)

    @property
    def total(self) -> float:
        return float(self.pixels.sum())


def lg_mode(l: int, waist: float, grid: TransverseGrid) -> SpatialField:
    """Laguerre-Gauss mode with radial index 0 and azimuthal index ``l``.

    ``amplitude ~ r**|l| * exp(-r**2 / waist**2) * exp(i l phi)``, normalized
    so that the pixel sum of ``|amplitude|**2`` is 1. The intensity ring peaks
    at ``r = waist * sqrt(|l| / 2)``.
    """
    if not waist > 0:
        raise InvalidArgument(f"waist must be positive, got {waist}")
    l = int(l)
    r, phi = grid.polar()
    rho = r / waist
    a = rho ** abs(l) * np.exp(-rho ** 2) * np.exp(1j * l * phi)
    norm = np.sqrt(np.sum(np.abs(a) ** 2))
    if norm == 0:
        raise InvalidArgument("mode has no support on this grid")
    return SpatialField(grid, a / norm, l)


def apply_spiral_phase(fld: SpatialField, l: int) -> SpatialField:
    """Multiply by ``exp(i l phi)``, as a spiral phase plate of charge ``l`` does."""
    l = int(l)
    if l == 0:
        return SpatialField(fld.grid, fld.amplitude.copy(), fld.oam_label)
    _, phi = fld.grid.polar()
    return SpatialField(fld.grid, fld.amplitude * np.exp(1j * l * phi), (fld.oam_label or 0) + l)


def intensity(fld: SpatialField) -> IntensityImage:
    return IntensityImage(fld.grid, np.abs(fld.amplitude) ** 2)


def transverse_scan(image: IntensityImage, row: int) -> np.ndarray:
    """One row of the image, modelling a fiber tip scanned along x."""
    row = int(row)
    if not 0 <= row < image.grid.height:
        raise InvalidArgument(f"row {row} outside 0..{image.grid.height - 1}")
    return image.pixels[row].copy()


def visibility(profile) -> float:
    """``(max - min) / (max + min)`` of a non-negative profile."""
    p = np.asarray(profile, dtype=float).ravel()
    if p.size == 0:
        raise InvalidArgument("empty profile")
    if np.any(p < 0):
        raise InvalidArgument("profile entries must be non-negative")
    hi, lo = float(p.max()), float(p.min())
    if hi == 0:
        raise UndefinedVisibility("visibility undefined for an all-zero profile")
    return (hi - lo) / (hi + lo)


def similarity(a, b) -> float:
    """Normalized inner product of two gray-scale matrices.

    Accepts IntensityImage or plain arrays (a 1-D scan is one image row).
    """
    A = np.asarray(a.pixels if isinstance(a, IntensityImage) else a, dtype=float)
    B = np.asarray(b.pixels if isinstance(b, IntensityImage) else b, dtype=float)
    if A.shape != B.shape:
        raise InvalidArgument(f"image shapes differ: {A.shape} vs {B.shape}")
    ma, mb = float(np.max(np.abs(A), initial=0.0)), float(np.max(np.abs(B), initial=0.0))
    if ma == 0 or mb == 0:
        raise UndefinedSimilarity("similarity undefined for an all-zero image")
    # the metric is scale invariant; rescaling first keeps tiny values from underflowing
    A, B = A / ma, B / mb
    r = float(np.sum(A * B)) / math.sqrt(float(np.sum(A * A)) * float(np.sum(B * B)))
    return float(min(max(r, 0.0), 1.0))


# ---------------------------------------------------------------------------
# serialization

_SCALE_RE = re.compile(r"#\s*scale\s+(\S+)")


def write_pgm(image: IntensityImage, path) -> None:
    """16-bit binary PGM. Pixel value ``v`` maps to ``round(v / vmax * 65535)``;
    ``vmax`` is recorded in a ``# scale`` comment line."""
    vmax = float(image.pixels.max())
    if vmax > 0:
        data = np.rint(image.pixels / vmax * 65535.0)
    else:
        data = np.zeros(image.grid.shape)
    header = (f"P5\n# scale {vmax!r}\n# pitch_mm {image.grid.pitch!r}\n"
              f"{image.grid.width} {image.grid.height}\n65535\n")
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(data.astype(">u2").tobytes())


def read_pgm(path) -> IntensityImage:
    with open(path, "rb") as fh:
        raw = fh.read()
    tokens = []
    scale = None
    pitch = 1.0
    pos = 0
    while len(tokens) < 4:
        end = raw.index(b"\n", pos)
        line = raw[pos:end].decode("ascii")
        pos = end + 1
        if line.startswith("#"):
            m = _SCALE_RE.match(line)
            if m:
                scale = float(m.group(1))
            elif line.startswith("# pitch_mm"):
                pitch = float(line.split()[2])
            continue
        tokens.extend(line.split())
    if tokens[0] != "P5":
        raise InvalidArgument(f"not a binary PGM: magic {tokens[0]!r}")
    w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    dtype = ">u2" if maxval > 255 else "u1"
    data = np.frombuffer(raw[pos:], dtype=dtype, count=w * h).reshape(h, w).astype(float)
    if scale is not None:
        data = data / maxval * scale
    return IntensityImage(TransverseGrid(w, h, pitch), data)


def write_profile_csv(positions_mm, values, path) -> None:
    with open(path, "w") as fh:
        fh.write("position_mm,value\n")
        for x, v in zip(positions_mm, values):
            fh.write(f"{x:.6f},{v:.10g}\n")


def read_profile_csv(path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1]
