#!/usr/bin/env python3
"""
Parameter and cost counts for both estimation stages.
"""

from typing import Dict, Optional

from testbench.defaults_config import DEFAULT_DIP
from testbench.numerics.seeding import make_rng
from testbench.stage1.mlp import init_mlp
from testbench.stage2.dip import DipConfig, dip_parameter_count


def stage1_counts(subcarriers: int, antennas: int) -> Dict[str, int]:
    """W = 32 N_f^2 weights per antenna network, read off an actual network."""
    model = init_mlp(subcarriers, make_rng(0))
    weights = model.weight_count
    return {
        'weights_per_antenna': weights,
        'biases_per_antenna': model.bias_count,
        'weights_total': antennas * weights,
        'backprop_cost': antennas * weights ** 2,
    }


def complexity_report(subcarriers: int, antennas: int,
                      dip: Optional[DipConfig] = None) -> Dict[str, int]:
    """Stage-1 counts for N_f and M, plus the DIP parameter count for the given geometry."""
    report = {'subcarriers': subcarriers, 'antennas': antennas}
    report.update(stage1_counts(subcarriers, antennas))
    if dip is None:
        dip = DipConfig(subcarriers=subcarriers, symbols=DEFAULT_DIP['symbols'], antennas=antennas)
    report['dip_parameters'] = dip_parameter_count(dip)
    report['dip_layers'] = dip.layers
    return report


def format_report(report: Dict[str, int]) -> str:
    width = max(len(k) for k in report)
    return "\n".join(f"{k.ljust(width)}  {v:,}" for k, v in report.items())
