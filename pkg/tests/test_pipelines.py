import json
import math
from dataclasses import replace

import numpy as np
import pytest

from qmemsim import pipelines
from qmemsim.config import parse_config
from qmemsim.errors import InsufficientStatistics
from qmemsim.oam_interference import count_lobes
from qmemsim.polarization import read_counts_json
from qmemsim.spatial_modes import read_pgm
from qmemsim.streams import read_csv, write_csv
from qmemsim.timetag_analysis import alpha_counts


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_zero_pair_rate_is_insufficient(tmp_path):
    cfg = parse_config("source.pair_rate = 0")
    with pytest.raises(InsufficientStatistics):
        pipelines.run_correlation(cfg, tmp_path, duration=0.1)


def test_correlation_outputs_are_deterministic(tmp_path):
    cfg = parse_config("correlation.duration = 1\nrun.seeds = 5")
    pipelines.run_correlation(cfg, tmp_path / "a")
    pipelines.run_correlation(cfg, tmp_path / "b")
    a, b = _files(tmp_path / "a"), _files(tmp_path / "b")
    assert set(a) == {"g2_vs_storage.csv", "decay_fit.json"}
    assert a == b
    assert (tmp_path / "a" / "g2_vs_storage.csv").read_text().count("\n") == 10


def test_image_memory_metrics(tmp_path):
    m = pipelines.run_image_memory(parse_config(""), tmp_path)
    assert m["visibility_in"] == pytest.approx(0.9, abs=0.03)
    assert m["visibility_out"] == pytest.approx(0.88, abs=0.03)
    assert json.loads((tmp_path / "metrics.json").read_text())["similarity"] == m["similarity"]
    assert {"input.pgm", "retrieved.pgm", "input_profile.csv", "retrieved_profile.csv"} <= set(_files(tmp_path))


def test_noiseless_image_similarity(tmp_path):
    m = pipelines.run_image_memory(parse_config("image.noise_rate = 0"), tmp_path)
    assert m["similarity"] >= 0.996


def test_flat_image(tmp_path):
    m = pipelines.run_image_memory(parse_config("image.mode = flat"), tmp_path)
    assert m["visibility_in"] == 0.0 and m["visibility_out"] == pytest.approx(0.0, abs=1e-12)
    assert m["similarity"] == pytest.approx(1.0)


def test_tomography_cases(tmp_path):
    ideal = parse_config("channel.phase_noise_sigma = 0\nchannel.depolarization = 0")
    fids = pipelines.run_tomography(ideal, tmp_path / "i", shots=10_000)["fidelities"]
    assert min(fids.values()) >= 0.98
    mixed = parse_config("channel.depolarization = 1")
    fids = pipelines.run_tomography(mixed, tmp_path / "m", shots=10_000)["fidelities"]
    assert all(abs(f - 0.5) < 0.02 for f in fids.values())
    assert {"chi.json", "fidelities.json", "counts.json"} <= set(_files(tmp_path / "m"))


def test_tomography_from_counts_file(tmp_path):
    cfg = parse_config("")
    first = pipelines.run_tomography(cfg, tmp_path / "a", shots=2000)
    again = pipelines.run_tomography(cfg, tmp_path / "b", counts=read_counts_json(tmp_path / "a" / "counts.json"))
    assert np.allclose(first["chi"].chi, again["chi"].chi)


def test_interference_outputs(tmp_path):
    cfg = parse_config("")
    v = pipelines.run_interference(cfg, tmp_path)
    assert 0.64 <= v["visibility"] <= 0.84
    for deg in (22.5, 67.5, 112.5, 157.5):
        img = read_pgm(tmp_path / f"pattern_theta{deg}.pgm")
        assert count_lobes(img, 1.0) == 4
    noiseless = replace(cfg, interference=replace(cfg.interference, noiseless=True))
    assert pipelines.run_interference(noiseless, tmp_path / "n")["visibility"] == pytest.approx(1.0, abs=1e-9)


def test_fringe_levels_match_independent_values():
    # rates from the calibrated source and memory, evaluated at 30 digits
    s, b = pipelines.fringe_levels(parse_config(""))
    assert s == pytest.approx(644.916129326204098657775996747, rel=1e-9)
    assert b == pytest.approx(118.158170780862212978665339579, rel=1e-9)


def test_analysis_of_file_matches_in_memory(tmp_path):
    cfg = parse_config("run.seeds = 8")
    stream = pipelines.simulate_stream(cfg, 0.5, store=False, hbt=True)
    write_csv(stream, tmp_path / "t.csv")
    direct = pipelines.analyze_stream(stream, cfg, tmp_path / "direct", hbt_b=3)
    from_file = pipelines.analyze_stream(read_csv(tmp_path / "t.csv", duration_ns=stream.span_ns()),
                                         cfg, tmp_path / "file", hbt_b=3)
    assert direct == from_file
    assert _files(tmp_path / "direct") == _files(tmp_path / "file")
    assert direct["alpha"] < 0.05


def test_empty_stream_analysis(tmp_path):
    (tmp_path / "e.csv").write_text("")
    summary = pipelines.analyze_stream(read_csv(tmp_path / "e.csv"), parse_config(""), tmp_path / "o")
    assert "warning" in summary
    assert (tmp_path / "o" / "histogram.csv").read_text() == "tau_ns,counts\n"


def test_heralded_alpha_rises_after_storage():
    cfg = parse_config("run.seeds = 21")
    before = pipelines.simulate_stream(cfg, 2.0, store=False, hbt=True)
    after = pipelines.simulate_stream(cfg, 2.0, store=True, hbt=True)
    a0 = alpha_counts(before, 1, 2, 3, 50.0, 44.0).alpha
    a1 = alpha_counts(after, 1, 2, 3, 50.0, 144.0)
    assert a0 < 0.05
    assert a1.alpha > a0 and math.isfinite(a1.stderr)


@pytest.mark.slow
def test_storage_scan_recovers_decoherence_time(tmp_path):
    # closure: fitted T of the retrieved g2 peaks versus the configured 348 ns
    cfg = parse_config("")
    fit = pipelines.run_correlation(cfg, tmp_path)["fit"]
    assert abs(fit.T / cfg.memory.decoherence_time - 1.0) < 0.15
