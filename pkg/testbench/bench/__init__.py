"""Baselines, NMSE metric, sweeps and CSV reporting."""

from testbench.bench.baselines import bussgang_ls_baseline, ls_unquantized_baseline
from testbench.bench.experiment import ExperimentConfig, run_demo, run_sweep
from testbench.bench.metrics import nmse
from testbench.bench.report import NmseReport, NmseRow, read_report, write_report
