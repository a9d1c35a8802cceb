#!/usr/bin/env python3
"""
Experiment sweeps: NMSE versus SNR for the two-stage estimator and its baselines.

A realization is one coherence interval: channel, pilots and noise are drawn from the
realization's named streams, so the same realization sees the same channel at every
SNR and only the noise scale changes.
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from testbench.airlink.config import SystemConfig
from testbench.airlink.link import IntervalData, simulate_interval
from testbench.bench.baselines import bussgang_ls_baseline, ls_unquantized_baseline
from testbench.bench.metrics import nmse_linear, to_db
from testbench.bench.report import NmseReport, NmseRow
from testbench.defaults_config import DEFAULT_DIP, DEFAULT_EXPERIMENT, METHODS
from testbench.errors import ConfigError, EstimationError, TestbenchError
from testbench.numerics.seeding import derive_seed, interval_streams, mixed_rng
from testbench.stage1.trainer import Stage1Estimate, Stage1Params, run_stage1
from testbench.stage2.dip import DipConfig, run_stage2

logger = logging.getLogger(__name__)

USER_MODES = ('all', 'first')


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemConfig = field(default_factory=SystemConfig)
    stage1: Stage1Params = field(default_factory=Stage1Params)
    dip: Optional[DipConfig] = None
    snr_db: Tuple[float, ...] = tuple(DEFAULT_EXPERIMENT['snr_db'])
    realizations: int = DEFAULT_EXPERIMENT['realizations']
    methods: Tuple[str, ...] = tuple(DEFAULT_EXPERIMENT['methods'])
    users: str = DEFAULT_EXPERIMENT['users']
    output: str = DEFAULT_EXPERIMENT['output']
    seed: int = DEFAULT_EXPERIMENT['seed']
    workers: int = DEFAULT_EXPERIMENT['workers']
    timing: bool = False

    def __post_init__(self):
        if self.dip is None:
            object.__setattr__(self, 'dip', DipConfig(subcarriers=self.system.subcarriers,
                                                      symbols=DEFAULT_DIP['symbols'],
                                                      antennas=self.system.antennas))
        object.__setattr__(self, 'snr_db', tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, 'methods', tuple(self.methods))
        self.validate()

    def validate(self) -> None:
        if self.realizations < 1:
            raise ConfigError(f"realizations must be >= 1, got {self.realizations}")
        if not self.snr_db:
            raise ConfigError("SNR sweep is empty")
        if any(math.isnan(s) for s in self.snr_db):
            raise ConfigError("SNR sweep contains NaN")
        if len(set(self.snr_db)) != len(self.snr_db):
            raise ConfigError(f"Duplicate SNR points in {list(self.snr_db)}")
        if not self.methods:
            raise ConfigError("No methods requested")
        unknown = [m for m in self.methods if m not in METHODS]
        if unknown:
            raise ConfigError(f"Unknown methods {unknown}; choose from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigError(f"Duplicate methods in {list(self.methods)}")
        if self.users not in USER_MODES:
            raise ConfigError(f"users must be one of {USER_MODES}, got '{self.users}'")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if (self.dip.subcarriers, self.dip.antennas) != (self.system.subcarriers, self.system.antennas):
            raise ConfigError("DIP geometry does not match the system's N_f and M")

    def evaluated_users(self) -> List[int]:
        return list(range(self.system.users)) if self.users == 'all' else [0]


@dataclass
class UserResult:
    """Per-method estimates for one user of one realization, plus stage traces."""

    user: int
    truth: np.ndarray
    estimates: Dict[str, np.ndarray] = field(default_factory=dict)
    seconds: Dict[str, float] = field(default_factory=dict)
    stage1: Optional[Stage1Estimate] = None
    fit_trace: List[float] = field(default_factory=list)


def estimate_user(data: IntervalData, k: int, methods: Sequence[str], cfg: ExperimentConfig,
                  stage1_hp: Stage1Params, dip_rng: np.random.Generator) -> UserResult:
    """Run every requested method for user k on one simulated interval."""
    result = UserResult(user=k, truth=data.channel.user_matrix(k))
    snr = data.cfg.snr_db

    if 'stage1-only' in methods or 'pipeline' in methods:
        start = time.perf_counter()
        result.stage1 = run_stage1(data.blocks, data.book, k, data.cfg, stage1_hp)
        stage1_time = time.perf_counter() - start
        if 'stage1-only' in methods:
            result.estimates['stage1-only'] = result.stage1.lambda_hat
            result.seconds['stage1-only'] = stage1_time
        if 'pipeline' in methods:
            start = time.perf_counter()
            result.estimates['pipeline'], result.fit_trace = run_stage2(result.stage1, cfg.dip, dip_rng)
            result.seconds['pipeline'] = stage1_time + time.perf_counter() - start

    if 'ls-unquantized' in methods:
        start = time.perf_counter()
        result.estimates['ls-unquantized'] = ls_unquantized_baseline(data.slots, data.book, k)
        result.seconds['ls-unquantized'] = time.perf_counter() - start

    if 'bussgang-ls' in methods:
        start = time.perf_counter()
        result.estimates['bussgang-ls'] = bussgang_ls_baseline(data.blocks, data.book, k, snr)
        result.seconds['bussgang-ls'] = time.perf_counter() - start
    return result


def run_realization(cfg: ExperimentConfig, system: SystemConfig,
                    realization: int) -> List[UserResult]:
    """Simulate one interval and evaluate the configured users.

    The airlink draws follow (experiment seed, system seed); the stage-1 networks and the
    DIP are further keyed on their own configured seeds.
    """
    streams = interval_streams(cfg.seed, realization, system.seed)
    try:
        data = simulate_interval(system, streams)
        stage1_hp = replace(cfg.stage1, seed=derive_seed(mixed_rng(cfg.stage1.seed, streams['stage1'])))
        dip_rng = mixed_rng(cfg.dip.seed, streams['stage2'])
        return [estimate_user(data, k, cfg.methods, cfg, stage1_hp, dip_rng)
                for k in cfg.evaluated_users()]
    except TestbenchError as e:
        raise EstimationError(system.snr_db, realization, e) from e


def realization_nmse(results: Sequence[UserResult], method: str) -> float:
    """Linear NMSE averaged over the evaluated users."""
    return float(np.mean([nmse_linear(r.estimates[method], r.truth) for r in results]))


def run_sweep(cfg: ExperimentConfig) -> NmseReport:
    """Mean NMSE (dB) per (snr, method) over cfg.realizations intervals."""
    logger.info("Sweep: %d SNR points x %d realizations, methods %s, seed %d",
                len(cfg.snr_db), cfg.realizations, ','.join(cfg.methods), cfg.seed)
    rows = []
    for snr in cfg.snr_db:
        system = cfg.system.with_snr(snr)
        indices = range(cfg.realizations)
        if cfg.workers > 1:
            with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
                outcomes = list(pool.map(lambda r: run_realization(cfg, system, r), indices))
        else:
            outcomes = [run_realization(cfg, system, r) for r in indices]

        for method in cfg.methods:
            linear = np.mean([realization_nmse(results, method) for results in outcomes])
            seconds = sum(r.seconds[method] for results in outcomes for r in results)
            row = NmseRow(snr_db=snr, method=method, nmse_db=to_db(float(linear)),
                          realizations=cfg.realizations, seed=cfg.seed,
                          wall_time_s=seconds if cfg.timing else 0.0)
            logger.info("SNR %6.2f dB  %-15s NMSE %8.3f dB", snr, method, row.nmse_db)
            rows.append(row)
    return NmseReport(rows=rows).sorted()


@dataclass
class DemoResult:
    """Per-method NMSE (dB) for one realization of user 0, with stage traces."""

    snr_db: float
    nmse_db: Dict[str, float]
    stage1_traces: List[List[float]] = field(default_factory=list)
    fit_trace: List[float] = field(default_factory=list)


DEMO_LABELS = (('stage1', 'stage1-only'), ('pipeline', 'pipeline'), ('bussgang-ls', 'bussgang-ls'))


def run_demo(cfg: ExperimentConfig, snr_db: Optional[float] = None,
             realization: int = 0) -> DemoResult:
    """One interval at one SNR, user 0, stage 1, full pipeline and the Bussgang baseline."""
    snr = cfg.snr_db[0] if snr_db is None else float(snr_db)
    demo_cfg = replace(cfg, methods=tuple(m for _, m in DEMO_LABELS), users='first')
    system = cfg.system.with_snr(snr)
    (result,) = run_realization(demo_cfg, system, realization)
    scores = {label: to_db(nmse_linear(result.estimates[method], result.truth))
              for label, method in DEMO_LABELS}
    return DemoResult(snr_db=snr, nmse_db=scores,
                      stage1_traces=result.stage1.loss_traces, fit_trace=result.fit_trace)
