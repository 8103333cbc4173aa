"""Configuration dataclasses, INI ingestion, and seed substreams."""

import numpy as np
import pytest

from cellpilot import (
    ConfigError,
    EnvOptions,
    RateOptions,
    SystemConfig,
    TrainingSchedule,
    load_config_file,
    load_config_overrides,
    substream,
)


def test_defaults_are_valid():
    cfg = SystemConfig()
    assert (cfg.L, cfg.K, cfg.M) == (7, 4, 100)
    assert cfg.eta == 2.5 and cfg.R == 500.0
    TrainingSchedule()
    EnvOptions()
    RateOptions()


def test_cell_edge_snr_linear():
    assert SystemConfig(gamma_snr_db=20.0).cell_edge_snr == pytest.approx(100.0)
    assert SystemConfig(gamma_snr_db=0.0).cell_edge_snr == pytest.approx(1.0)


@pytest.mark.parametrize("kw", [
    dict(L=0), dict(K=0), dict(M=0),
    dict(eta=-1.0), dict(R=0.0), dict(sigma2=0.0), dict(spacing=0.0),
    dict(scatter_radius=0.0),
    dict(exclusion_radius=-1.0), dict(exclusion_radius=500.0),
    dict(path_gain="rayleigh"), dict(paths=0),
])
def test_system_config_rejects(kw):
    with pytest.raises(ConfigError):
        SystemConfig(**kw)


@pytest.mark.parametrize("kw", [
    dict(discount=1.5), dict(discount=-0.1),
    dict(batch_size=600, replay_capacity=500),
    dict(target_sync_period=0),
])
def test_training_schedule_rejects(kw):
    with pytest.raises(ConfigError):
        TrainingSchedule(**kw)


@pytest.mark.parametrize("kw", [
    dict(redraw="always"),
    dict(q_low=0.0), dict(q_high=1.0), dict(q_low=0.7, q_high=0.3),
    dict(threshold_samples=1),
])
def test_env_options_rejects(kw):
    with pytest.raises(ConfigError):
        EnvOptions(**kw)


@pytest.mark.parametrize("kw", [dict(n_mc=0), dict(eval_every=0), dict(paths=0)])
def test_rate_options_rejects(kw):
    with pytest.raises(ConfigError):
        RateOptions(**kw)


CONFIG_TEXT = """
[scenario]
L = 3
K = 2
M = 32
R = 400.0
clamp_aoa = true
path_gain = complex_normal

[training]
eps_decay = 0.999
batch_size = 50
replay_capacity = 100

[env]
redraw = none
q_low = 0.1
q_high = 0.5

[rate]
n_mc = 7
pilot_snr_db = 10.0
ergodic = false
"""


def test_load_config_file_round_trip(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(CONFIG_TEXT)
    opts = load_config_file(str(path))
    cfg = opts["scenario"]
    assert (cfg.L, cfg.K, cfg.M, cfg.R) == (3, 2, 32, 400.0)
    assert cfg.clamp_aoa is True and cfg.path_gain == "complex_normal"
    assert cfg.eta == 2.5  # untouched fields keep their defaults
    assert opts["training"].eps_decay == 0.999
    assert opts["env"].redraw == "none"
    assert opts["rate"].n_mc == 7
    assert opts["rate"].pilot_snr_db == 10.0
    assert opts["rate"].ergodic is False


def test_load_config_overrides_only_given_keys(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[scenario]\nL = 2\n")
    ov = load_config_overrides(str(path))
    assert ov == {"scenario": {"L": 2}}


@pytest.mark.parametrize("text", [
    "[nosuchsection]\nx = 1\n",
    "[scenario]\nnot_a_key = 1\n",
    "[scenario]\nL = not_an_int\n",
    "[scenario]\nclamp_aoa = maybe\n",
])
def test_load_config_rejects_bad_input(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(ConfigError):
        load_config_overrides(str(path))


def test_load_config_missing_file():
    with pytest.raises(ConfigError):
        load_config_overrides("/nonexistent/none.ini")


def test_config_file_values_reach_validation(tmp_path):
    path = tmp_path / "bad.ini"
    path.write_text("[scenario]\nL = 0\n")
    with pytest.raises(ConfigError):
        load_config_file(str(path))


def test_substream_deterministic_and_labelled():
    a = substream(7, "world").random(4)
    b = substream(7, "world").random(4)
    assert np.array_equal(a, b)
    c = substream(7, "thresholds").random(4)
    d = substream(8, "world").random(4)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_substream_mixed_labels():
    a = substream(0, "rate", 10).random(3)
    b = substream(0, "rate", 11).random(3)
    assert not np.array_equal(a, b)
