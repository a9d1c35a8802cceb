"""Shared fixtures and the --runslow switch for Monte-Carlo acceptance checks."""

from pathlib import Path

import numpy as np
import pytest

from testbench.airlink.config import SystemConfig
from testbench.bench.experiment import ExperimentConfig
from testbench.numerics.seeding import interval_streams
from testbench.stage1.trainer import Stage1Params
from testbench.stage2.dip import DipConfig

REPO_ROOT = Path(__file__).resolve().parent.parent

TINY_YAML = """\
system:
  users: 1
  antennas: 2
  subcarriers: 8
  symbols: 8
  pilots: 2
  tap_profile:
    - {delay_ns: 0, power_db: 0.0}
stage1:
  epochs: 5
  generated_samples: 4
dip:
  layers: 2
  widths: [4, 4]
  symbols: 4
  iterations: 3
experiment:
  snr_db: [0, 10]
  realizations: 2
  output: nmse.csv
"""


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False,
                     help="run Monte-Carlo acceptance checks")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(1234))


@pytest.fixture
def small_system():
    """Two users, four antennas, 16 subcarriers, three taps."""
    return SystemConfig(users=2, antennas=4, subcarriers=16, symbols=12, pilots=4,
                        snr_db=10.0, tap_profile=((0, 0.6), (1, 0.3), (4, 0.1)))


@pytest.fixture
def streams():
    return interval_streams(7, 0)


@pytest.fixture
def make_tiny_experiment():
    """Factory for a sweep small enough to run in a second or two."""

    def build(**overrides):
        fields = dict(
            system=SystemConfig(users=1, antennas=2, subcarriers=8, symbols=8, pilots=2,
                                tap_profile=((0, 0.7), (1, 0.3))),
            stage1=Stage1Params(epochs=5, generated_samples=4),
            dip=DipConfig(subcarriers=8, symbols=4, antennas=2, layers=2, widths=(4, 4, 4), iterations=3),
            snr_db=(0.0, 10.0),
            realizations=2,
            seed=3,
        )
        fields.update(overrides)
        return ExperimentConfig(**fields)

    return build


@pytest.fixture
def tiny_cfg(make_tiny_experiment):
    return make_tiny_experiment()


@pytest.fixture
def tiny_config_file(tmp_path):
    path = tmp_path / "tiny.yaml"
    path.write_text(TINY_YAML, encoding="utf-8")
    return path
