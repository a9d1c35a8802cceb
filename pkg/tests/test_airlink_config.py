import logging
import math

import pytest

from testbench.airlink.config import SystemConfig, epa_profile, normalize_profile, profile_from_ns_db
from testbench.errors import ConfigError


@pytest.mark.parametrize("subcarriers", [8, 16, 32, 64])
def test_epa_collapses_to_one_tap_up_to_64_subcarriers(subcarriers, caplog):
    with caplog.at_level(logging.WARNING, logger="testbench.airlink.config"):
        profile = epa_profile(subcarriers)
    assert profile == ((0, 1.0),)
    assert "Merged 7 taps" in caplog.text


def test_epa_on_a_fine_grid_merges_colliding_taps():
    profile = epa_profile(2048)
    assert [d for d, _ in profile] == [0, 1, 2, 3, 6, 13]
    assert math.isclose(sum(p for _, p in profile), 1.0)
    powers = dict(profile)
    assert powers[0] > powers[1] > powers[2]


def test_profile_is_renormalized(caplog):
    with caplog.at_level(logging.WARNING):
        profile = normalize_profile([(0, 2.0), (3, 2.0)])
    assert profile == ((0, 0.5), (3, 0.5))
    assert "Renormalizing" in caplog.text


def test_profile_rejects_negative_delay():
    with pytest.raises(ConfigError):
        profile_from_ns_db([-10.0], [0.0], 64)


def test_default_config():
    cfg = SystemConfig()
    assert (cfg.users, cfg.antennas, cfg.subcarriers, cfg.pilots) == (4, 16, 64, 20)
    assert cfg.tap_delays == [0]
    assert cfg.noise_variance == pytest.approx(0.1)


def test_infinite_snr_is_noiseless():
    assert SystemConfig(snr_db=math.inf).noise_variance == 0.0


def test_with_snr_keeps_everything_else(small_system):
    other = small_system.with_snr(-5.0)
    assert other.snr_db == -5.0
    assert other.tap_profile == small_system.tap_profile
    assert other.noise_variance == pytest.approx(10 ** 0.5)


@pytest.mark.parametrize("kwargs", [
    {"users": 0},
    {"antennas": 0},
    {"subcarriers": 48},
    {"pilots": 0},
    {"pilots": 100, "symbols": 80},
    {"snr_db": math.nan},
    {"subcarriers": 8, "tap_profile": ((0, 0.5), (8, 0.5))},
    {"tap_profile": ((0, 0.5), (1, 0.4))},
    {"tap_profile": ((0, 0.5), (0, 0.5))},
    {"tap_profile": ((0, 1.5), (1, -0.5))},
])
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        SystemConfig(**kwargs)
