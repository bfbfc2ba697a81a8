import pytest

from qmemsim.config import default_config, dump_config, load_config, parse_config
from qmemsim.errors import ConfigError
from qmemsim.pair_source import analytic_g2


def test_defaults_are_calibrated():
    cfg = default_config()
    assert analytic_g2(19.0, cfg.source, 1.0) == pytest.approx(200.0, rel=1e-9)
    assert cfg.memory.noise_rate == 90000.0
    assert cfg.seeds and cfg.seed == cfg.seeds[0]


def test_values_comments_and_lists():
    cfg = parse_config("""
        # comment line
        memory.eta0 = 0.2      # trailing comment
        memory.decay = gaussian
        correlation.storage_times = 0, 100, 200, 300
        interference.noiseless = true
        run.seeds = 3, 4
        run.output_dir = results
    """)
    assert cfg.memory.eta0 == 0.2 and cfg.memory.decay == "gaussian"
    assert cfg.correlation.storage_times == (0.0, 100.0, 200.0, 300.0)
    assert cfg.interference.noiseless is True
    assert cfg.seeds == (3, 4) and cfg.output_dir == "results"


def test_explicit_pair_rate_skips_calibration():
    assert parse_config("source.pair_rate = 1234").source.pair_rate == 1234.0
    assert parse_config("source.target_peak = 50").target_peak == 50.0


@pytest.mark.parametrize("text,line", [
    ("memory.eta0 = 0.1\nbogus.key = 3", 2),
    ("\n\nmemory.eta0 = abc", 3),
    ("memory.eta0 0.1", 1),
    ("interference.noiseless = maybe", 1),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(text)
    assert exc.value.line == line
    assert str(exc.value).startswith(f"line {line}:")


def test_invalid_component_values_are_config_errors():
    with pytest.raises(ConfigError):
        parse_config("memory.eta0 = 2")
    with pytest.raises(ConfigError):
        parse_config("run.seeds = ")


def test_dump_round_trip(tmp_path):
    cfg = parse_config("channel.depolarization = 0.1\nrun.seeds = 9")
    path = tmp_path / "c.cfg"
    path.write_text(dump_config(cfg))
    assert load_config(path) == cfg


def test_missing_file():
    with pytest.raises(ConfigError):
        load_config("/nonexistent/config.cfg")
