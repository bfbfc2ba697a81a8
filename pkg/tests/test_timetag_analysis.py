import json
import math

import numpy as np
import pytest

from qmemsim.errors import IllConditionedFit, InsufficientStatistics, InvalidArgument
from qmemsim.pair_source import SourceParams, hbt_split, simulate_timetags
from qmemsim.streams import TimeTagStream
from qmemsim.timetag_analysis import (AlphaCounts, G2Curve, alpha_counts, anti_correlation_alpha,
                                      cauchy_schwarz_R, coincidence_histogram, estimate_auto_g2,
                                      fit_exponential_decay, measure_alpha, windowed_peak,
                                      write_decay_fit_json, write_g2_csv, write_histogram_csv)


def _stream(pairs):
    ch, t = zip(*pairs)
    return TimeTagStream.from_unsorted(ch, t, channel_set=(1, 2, 3))


def test_empty_stream_histogram_is_zero():
    h = coincidence_histogram(TimeTagStream.empty((1, 2)), 1, 2, 1.0, (-10, 10))
    assert h.bins.shape == (20,) and h.bins.sum() == 0


def test_equal_times_land_in_zero_bin():
    h = coincidence_histogram(_stream([(1, 1000), (2, 1000)]), 1, 2, 1.0, (-5, 5))
    assert h.bins[5] == 1 and h.bins.sum() == 1
    assert h.tau[5] == 0.0


def test_histogram_against_brute_force(rng):
    s = TimeTagStream.from_unsorted(rng.integers(1, 3, 400), rng.integers(0, 5000, 400))
    h = coincidence_histogram(s, 1, 2, 3.0, (-30.0, 60.0))
    ta, tb = s.channel_times(1), s.channel_times(2)
    d = (tb[None, :] - ta[:, None]).ravel()
    d = d[(d >= -30) & (d < 60)]
    ref = np.bincount(np.floor((d + 30) / 3.0).astype(int), minlength=30)
    assert np.array_equal(h.bins, ref)


def test_histogram_argument_checks():
    s = _stream([(1, 0), (2, 1)])
    with pytest.raises(InvalidArgument):
        coincidence_histogram(s, 1, 2, 0.5, (0, 10))
    with pytest.raises(InvalidArgument):
        coincidence_histogram(s, 1, 2, 3.0, (0, 10))
    with pytest.raises(InvalidArgument):
        coincidence_histogram(s, 1, 2, 1.0, (10, 0))


def test_rebin_preserves_total(rng):
    s = TimeTagStream.from_unsorted(rng.integers(1, 3, 300), rng.integers(0, 3000, 300))
    h = coincidence_histogram(s, 1, 2, 1.0, (-60.0, 60.0))
    r = h.rebin(4)
    assert r.bins.sum() == h.bins.sum() and r.bin_width == 4.0
    assert np.array_equal(r.bins, coincidence_histogram(s, 1, 2, 4.0, (-60.0, 60.0)).bins)
    with pytest.raises(InvalidArgument):
        h.rebin(7)


def test_cauchy_schwarz_values():
    assert cauchy_schwarz_R(200, 2, 2) == 10000
    assert cauchy_schwarz_R(1, 1, 1) == 1
    assert cauchy_schwarz_R(2, 2, 2) == 1


def test_alpha_formula_and_errors():
    assert anti_correlation_alpha(100, 10, 10, 0) == 0.0
    assert anti_correlation_alpha(100, 10, 10, 1) == 1.0
    with pytest.raises(InsufficientStatistics):
        anti_correlation_alpha(100, 0, 10, 0)
    assert AlphaCounts(100, 10, 10, 1).stderr > 0


def test_hand_built_alpha_stream():
    s = _stream([(1, 0), (1, 1000), (1, 2000), (1, 3000), (2, 10), (3, 1010)])
    c = alpha_counts(s, 1, 2, 3, window=50.0, delay=0.0)
    assert (c.P1, c.P12, c.P13, c.P123) == (4, 1, 1, 0)
    assert c.alpha == 0.0


def test_alpha_without_signal_is_insufficient():
    s = _stream([(1, 0), (1, 100)])
    with pytest.raises(InsufficientStatistics):
        measure_alpha(s, 1, 2, 3)


def test_coherent_source_alpha_is_one():
    # independent Poisson clicks on both arms: P123 = P12 * P13 / P1 on average
    p = SourceParams(pair_rate=0.0, background_rate_trigger=1e5, background_rate_signal=1e6)
    s = simulate_timetags(p, 3.0, seed=11)
    s = hbt_split(s, 2, 2, 3, seed=12)
    c = alpha_counts(s, 1, 2, 3, window=50.0, delay=44.0)
    assert c.P123 > 100
    assert abs(c.alpha - 1.0) < 3 * c.stderr


def test_auto_g2_of_uncorrelated_arms_is_one():
    p = SourceParams(pair_rate=0.0, background_rate_trigger=1.0, background_rate_signal=2e5)
    s = hbt_split(simulate_timetags(p, 5.0, seed=2), 2, 2, 3, seed=3)
    g, err = estimate_auto_g2(s, 2, 3, window=100.0)
    assert abs(g - 1.0) < 4 * err


def test_windowed_peak_recovers_exponential():
    tau = np.arange(0.0, 100.0)
    g = 1.0 + 50.0 * np.exp(-(tau - 19.0) / 40.0) * (tau >= 19)
    curve = G2Curve(tau, g, np.full_like(tau, 0.1))
    peak, err = windowed_peak(curve, 19.0, 20.0, 40.0)
    assert peak == pytest.approx(51.0, rel=1e-12)
    assert err == pytest.approx(0.1 * math.sqrt(20) / np.exp(-np.arange(20) / 40.0).sum())
    with pytest.raises(InvalidArgument):
        windowed_peak(curve, 500.0, 20.0, 40.0)


# --- decay fit ---------------------------------------------------------------

T_GRID = np.arange(0.0, 401.0, 50.0)


def _curve(A, T, g0, t=T_GRID):
    return A * np.exp(-t / T) + g0


def test_noiseless_paper_curve_recovered():
    pts = [(t, g, 0.0) for t, g in zip(T_GRID, _curve(13.3, 348.0, -1.89))]
    fit = fit_exponential_decay(pts)
    assert fit.A == pytest.approx(13.3, rel=1e-6)
    assert fit.T == pytest.approx(348.0, rel=1e-6)
    assert fit.g0 == pytest.approx(-1.89, rel=1e-6)
    assert fit.residual_norm < 1e-9


def test_clean_unit_exponential():
    fit = fit_exponential_decay(list(zip(T_GRID, _curve(1.0, 100.0, 0.0))))
    assert (fit.A, fit.T, fit.g0) == pytest.approx((1.0, 100.0, 0.0), abs=1e-9)


def test_fit_is_order_independent():
    pts = [(t, g, 0.1) for t, g in zip(T_GRID, _curve(13.3, 348.0, -1.89))]
    a = fit_exponential_decay(pts)
    b = fit_exponential_decay(pts[::-1])
    assert (a.A, a.T, a.g0) == pytest.approx((b.A, b.T, b.g0), rel=1e-12)


def test_constant_data_is_ill_conditioned():
    with pytest.raises(IllConditionedFit) as exc:
        fit_exponential_decay([(t, 5.0, 0.1) for t in T_GRID])
    assert exc.value.parameter == "T"


def test_too_few_points():
    with pytest.raises(InvalidArgument):
        fit_exponential_decay([(0, 1, 0.1), (1, 0.5, 0.1), (2, 0.2, 0.1)])


def test_writers(tmp_path):
    s = _stream([(1, 0), (2, 19)])
    h = coincidence_histogram(s, 1, 2, 1.0, (0.0, 40.0))
    write_histogram_csv(h, tmp_path / "h.csv")
    lines = (tmp_path / "h.csv").read_text().splitlines()
    assert lines[0] == "tau_ns,counts" and lines[20] == "19,1"
    write_g2_csv(G2Curve(np.array([0.0]), np.array([2.0]), np.array([0.5])), tmp_path / "g.csv")
    assert (tmp_path / "g.csv").read_text() == "tau_ns,g,stderr\n0,2,0.5\n"
    fit = fit_exponential_decay(list(zip(T_GRID, _curve(1.0, 100.0, 0.0))))
    write_decay_fit_json(fit, tmp_path / "f.json")
    assert set(json.loads((tmp_path / "f.json").read_text())) == {"A", "T_ns", "g0", "residual_norm"}
