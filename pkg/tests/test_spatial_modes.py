import math

import numpy as np
import pytest

from qmemsim.errors import InvalidArgument, UndefinedSimilarity, UndefinedVisibility
from qmemsim.spatial_modes import (IntensityImage, SpatialField, TransverseGrid, apply_spiral_phase,
                                   intensity, lg_mode, read_pgm, read_profile_csv, similarity,
                                   transverse_scan, visibility, write_pgm, write_profile_csv)


def test_gaussian_peaks_at_center(odd_grid):
    img = intensity(lg_mode(0, 1.0, odd_grid))
    assert np.unravel_index(np.argmax(img.pixels), img.pixels.shape) == (64, 64)


def test_donut_has_exact_zero_on_axis(odd_grid):
    img = intensity(lg_mode(1, 1.0, odd_grid))
    assert img.pixels[64, 64] < 1e-12 * img.pixels.max()


def test_ring_radius_matches_analytic_maximum(odd_grid):
    # r^2 exp(-2 r^2 / w^2) peaks at r = w / sqrt(2)
    img = intensity(lg_mode(1, 1.0, odd_grid))
    x = odd_grid.row_positions()
    row = img.pixels[64]
    r_peak = abs(x[int(np.argmax(row))])
    assert abs(r_peak - 1.0 / math.sqrt(2.0)) <= odd_grid.pitch


def test_donut_central_minimum_below_one_percent():
    img = intensity(lg_mode(1, 1.0, TransverseGrid()))
    c = TransverseGrid().height // 2
    assert img.pixels[c - 1:c + 1, c - 1:c + 1].min() < 0.01 * img.pixels.max()


def test_lg_mode_normalized():
    f = lg_mode(2, 1.0, TransverseGrid())
    assert f.power == pytest.approx(1.0, abs=1e-12)


def test_lg_modes_of_opposite_charge_are_orthogonal(odd_grid):
    # exp(2i phi) sums to zero on a square lattice by symmetry; exp(4i phi)
    # does not, so l=2 is orthogonal only up to pixelization
    a, b = lg_mode(1, 1.0, odd_grid), lg_mode(-1, 1.0, odd_grid)
    assert abs(a.inner(b)) < 1e-10
    a, b = lg_mode(2, 1.0, odd_grid), lg_mode(-2, 1.0, odd_grid)
    assert abs(a.inner(b)) < 5e-3


def test_spiral_phase_identities(odd_grid):
    g = lg_mode(0, 1.0, odd_grid)
    assert np.array_equal(apply_spiral_phase(g, 0).amplitude, g.amplitude)
    back = apply_spiral_phase(apply_spiral_phase(g, 1), -1)
    assert np.max(np.abs(back.amplitude - g.amplitude)) < 1e-12
    assert np.max(np.abs(intensity(apply_spiral_phase(g, 1)).pixels - intensity(g).pixels)) < 1e-15
    assert apply_spiral_phase(g, 3).oam_label == 3


def test_intensity_of_uniform_and_imaginary_amplitude():
    grid = TransverseGrid(4, 3, 0.1)
    assert np.all(intensity(SpatialField(grid, np.ones(grid.shape))).pixels == 1.0)
    amp = np.zeros(grid.shape, complex)
    amp[1, 2] = 1j
    assert intensity(SpatialField(grid, amp)).pixels[1, 2] == 1.0


def test_transverse_scan_cases(odd_grid):
    flat = IntensityImage(odd_grid, np.full(odd_grid.shape, 3.0))
    assert np.all(transverse_scan(flat, 10) == 3.0)
    strip = IntensityImage(TransverseGrid(5, 1, 0.1), np.arange(5.0)[None, :])
    assert np.array_equal(transverse_scan(strip, 0), np.arange(5.0))
    donut = transverse_scan(intensity(lg_mode(1, 1.0, odd_grid)), 64)
    left, right = np.argmax(donut[:64]), 64 + np.argmax(donut[64:])
    assert donut[64] < donut[left] and donut[64] < donut[right]
    with pytest.raises(InvalidArgument):
        transverse_scan(flat, 129)


def test_visibility_cases():
    assert visibility([0.0, 1.0, 2.0]) == 1.0
    assert visibility([5.0, 5.0]) == 0.0
    assert visibility([1.0, 19.0]) == pytest.approx(0.9)
    with pytest.raises(UndefinedVisibility):
        visibility([0.0, 0.0])
    with pytest.raises(InvalidArgument):
        visibility([-1.0, 1.0])


def test_similarity_cases(odd_grid):
    a = intensity(lg_mode(1, 1.0, odd_grid))
    assert similarity(a, a) == pytest.approx(1.0)
    assert similarity(a.pixels, 2 * a.pixels) == pytest.approx(1.0)
    left = np.zeros((2, 4))
    left[:, :2] = 1
    assert similarity(left, 1 - left) == 0.0
    with pytest.raises(UndefinedSimilarity):
        similarity(np.zeros(3), np.ones(3))
    with pytest.raises(InvalidArgument):
        similarity(np.ones(3), np.ones(4))


def test_pgm_round_trip(tmp_path, odd_grid):
    img = intensity(lg_mode(2, 1.0, odd_grid))
    write_pgm(img, tmp_path / "a.pgm")
    back = read_pgm(tmp_path / "a.pgm")
    assert back.grid.shape == img.grid.shape
    assert back.grid.pitch == img.grid.pitch
    # 16-bit quantization
    assert np.max(np.abs(back.pixels - img.pixels)) <= img.pixels.max() / 65535
    assert (tmp_path / "a.pgm").read_bytes().startswith(b"P5\n")


def test_profile_csv_round_trip(tmp_path):
    x = np.linspace(-1, 1, 7)
    v = x ** 2 + 1
    write_profile_csv(x, v, tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines()[0] == "position_mm,value"
    xb, vb = read_profile_csv(tmp_path / "p.csv")
    assert np.allclose(xb, x, atol=1e-6) and np.allclose(vb, v, rtol=1e-9)


def test_invalid_inputs():
    with pytest.raises(InvalidArgument):
        TransverseGrid(0, 10, 0.1)
    with pytest.raises(InvalidArgument):
        IntensityImage(TransverseGrid(2, 2, 0.1), -np.ones((2, 2)))
