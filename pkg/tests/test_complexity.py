import pytest

from testbench.bench.complexity import complexity_report, format_report, stage1_counts
from testbench.stage2.dip import DipConfig, dip_parameter_count


@pytest.mark.parametrize("n_f", [8, 16, 64])
def test_stage1_weights_grow_quadratically(n_f):
    counts = stage1_counts(n_f, antennas=4)
    assert counts["weights_per_antenna"] == 32 * n_f ** 2
    assert counts["biases_per_antenna"] == 10 * n_f
    assert counts["weights_total"] == 4 * 32 * n_f ** 2
    assert counts["backprop_cost"] == 4 * (32 * n_f ** 2) ** 2


def test_dip_count_follows_the_given_geometry():
    dip = DipConfig(subcarriers=16, symbols=8, antennas=2, layers=2, widths=(4, 6, 4))
    report = complexity_report(16, 2, dip)
    assert report["dip_parameters"] == dip_parameter_count(dip)
    assert report["dip_layers"] == 2


def test_default_dip_geometry():
    report = complexity_report(64, 16)
    assert report["dip_layers"] == 5
    assert report["dip_parameters"] > 0


def test_formatting():
    text = format_report({"subcarriers": 64, "weights_total": 2097152})
    assert text.splitlines() == ["subcarriers    64", "weights_total  2,097,152"]
