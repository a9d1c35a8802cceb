#!/usr/bin/env python3
"""
Stage 1: supervised per-antenna estimation.

For every antenna m and pilot slot p of user k the label is diag(F r_p[m] x_{k,p}^H),
i.e. the received spectrum derotated by the known pilot. One network per antenna
regresses labels from pilots; the channel estimate is the average network output
over N_g freshly drawn QPSK inputs.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from testbench.airlink.config import SystemConfig
from testbench.airlink.link import QuantizedRxBlock, bussgang_gain
from testbench.airlink.pilots import PilotBook, qpsk
from testbench.defaults_config import DEFAULT_STAGE1
from testbench.errors import ConfigError, DimensionError, DivergenceError, MissingSlotsError, PilotError
from testbench.numerics.dft import dft, make_plan
from testbench.numerics.optim import AdamState, adam_step
from testbench.numerics.packing import to_complex, to_real
from testbench.numerics.tape import GradTape, squared_error
from testbench.stage1.mlp import MlpModel, anchor_output, init_mlp, mlp_forward, mlp_forward_tape, watch_params

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Stage1Params:
    epochs: int = DEFAULT_STAGE1['epochs']
    learning_rate: float = DEFAULT_STAGE1['learning_rate']
    generated_samples: int = DEFAULT_STAGE1['generated_samples']
    seed: int = DEFAULT_STAGE1['seed']
    workers: int = DEFAULT_STAGE1['workers']
    log_every: int = DEFAULT_STAGE1['log_every']

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.generated_samples < 1:
            raise ConfigError(f"generated_samples must be >= 1, got {self.generated_samples}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class TrainingSet:
    """inputs/labels: (N_t, 2N_f) real, Re/Im concatenated."""

    inputs: np.ndarray
    labels: np.ndarray
    antenna: int = 0
    user: int = 0

    def __post_init__(self):
        if self.inputs.shape != self.labels.shape or self.inputs.ndim != 2:
            raise DimensionError(
                f"Training inputs {self.inputs.shape} and labels {self.labels.shape} must match")
        if self.inputs.shape[0] < 1:
            raise MissingSlotsError("Training set is empty")

    @property
    def size(self) -> int:
        return self.inputs.shape[0]


@dataclass
class Stage1Estimate:
    """lambda_hat: (N_f, M) complex estimate of Lambda_k."""

    lambda_hat: np.ndarray
    loss_traces: List[List[float]] = field(default_factory=list)
    user: int = 0


def make_label(r_m: np.ndarray, x: np.ndarray) -> np.ndarray:
    """(F r_m)_n * conj(x_n)."""
    r_m = np.asarray(r_m)
    x = np.asarray(x)
    if r_m.shape != x.shape or r_m.ndim != 1:
        raise DimensionError(f"Received vector {r_m.shape} and pilot {x.shape} must be equal-length vectors")
    if not np.allclose(np.abs(x), 1.0, rtol=0, atol=1e-9):
        raise PilotError("Pilot entries must have unit modulus to be derotated")
    return dft(make_plan(len(x)), r_m) * np.conj(x)


def build_training_set(blocks: Sequence[QuantizedRxBlock], book: PilotBook,
                       k: int, m: int) -> TrainingSet:
    """Pairs (pilot, label) from antenna column m of user k's blocks."""
    inputs, labels = [], []
    for block in blocks:
        if block.user != k:
            continue
        x = book.pilot_for_slot(block.slot)
        inputs.append(to_real(x))
        labels.append(to_real(make_label(block.column(m), x)))
    if not inputs:
        raise MissingSlotsError(f"No pilot slots for user {k}")
    return TrainingSet(inputs=np.stack(inputs), labels=np.stack(labels), antenna=m, user=k)


def training_loss(model: MlpModel, ts: TrainingSet) -> float:
    """Mean over pairs of ||z_p - label_p||^2."""
    diff = mlp_forward(model, ts.inputs) - ts.labels
    return float(np.sum(diff * diff) / ts.size)


def train_antenna_net(ts: TrainingSet, hp: Stage1Params,
                      rng: np.random.Generator) -> MlpModel:
    """Full-batch Adam on the mean squared label error; the model carries its loss trace.

    Training starts from the output-anchored network, which already predicts the mean
    label for every input.
    """
    if ts.inputs.shape[1] % 2:
        raise DimensionError(f"Input width {ts.inputs.shape[1]} is not 2 N_f")
    model = anchor_output(init_mlp(ts.inputs.shape[1] // 2, rng), ts.labels)
    params = model.params
    state = AdamState(learning_rate=hp.learning_rate)
    trace = []
    for epoch in range(hp.epochs):
        tape = GradTape()
        variables = watch_params(tape, params)
        out = mlp_forward_tape(tape, variables, tape.constant(ts.inputs))
        loss = squared_error(out, tape.constant(ts.labels), divisor=ts.size)
        value = float(loss.value)
        if not np.isfinite(value):
            raise DivergenceError(epoch, stage="stage-1 training")
        trace.append(value)
        if hp.log_every and epoch % hp.log_every == 0:
            logger.debug("antenna %d epoch %d loss %.6g", ts.antenna, epoch, value)
        params = adam_step(state, params, tape.backward(loss))
    trained = MlpModel(params=params, loss_trace=trace)
    logger.debug("antenna %d trained: first loss %.6g, final loss %.6g",
                 ts.antenna, trace[0], training_loss(trained, ts))
    return trained


def generate_estimate(model: MlpModel, generated_samples: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Average network output over N_g random QPSK inputs, returned as N_f complex values."""
    if generated_samples < 1:
        raise ConfigError(f"Need at least one generated sample, got {generated_samples}")
    inputs = to_real(qpsk(rng, (generated_samples, model.input_size // 2)))
    outputs = mlp_forward(model, inputs)
    return to_complex(outputs.mean(axis=0))


def antenna_streams(seed: int) -> Tuple[np.random.Generator, np.random.Generator]:
    """(initialization, generation) generators; identical for every antenna of a run."""
    init_seq, gen_seq = np.random.SeedSequence(seed).spawn(2)
    return np.random.Generator(np.random.PCG64(init_seq)), np.random.Generator(np.random.PCG64(gen_seq))


def estimate_antenna(ts: TrainingSet, hp: Stage1Params) -> Tuple[np.ndarray, MlpModel]:
    init_rng, gen_rng = antenna_streams(hp.seed)
    model = train_antenna_net(ts, hp, init_rng)
    return generate_estimate(model, hp.generated_samples, gen_rng), model


def label_gain(blocks: Sequence[QuantizedRxBlock], cfg: SystemConfig) -> float:
    """Scalar the labels carry on top of Lambda: the Bussgang gain for one-bit blocks, 1 otherwise."""
    kinds = {b.quantized for b in blocks}
    if len(kinds) != 1:
        raise DimensionError("Cannot mix quantized and unquantized blocks in one training set")
    return bussgang_gain(cfg.snr_db) if kinds.pop() else 1.0


def run_stage1(blocks: Sequence[QuantizedRxBlock], book: PilotBook, k: int,
               cfg: SystemConfig, hp: Optional[Stage1Params] = None) -> Stage1Estimate:
    """Train one network per antenna column for user k and stack the estimates.

    The stacked network averages are divided by label_gain so the estimate sits on the
    scale of Lambda rather than of G Lambda.
    """
    hp = hp or Stage1Params()
    owned = [b for b in blocks if b.user == k]
    if len(owned) < cfg.pilots:
        raise MissingSlotsError(
            f"User {k} has {len(owned)} pilot blocks, expected {cfg.pilots}")
    antennas = owned[0].shape[1]
    sets = [build_training_set(owned, book, k, m) for m in range(antennas)]

    if hp.workers > 1:
        with ThreadPoolExecutor(max_workers=hp.workers) as pool:
            results = list(pool.map(lambda ts: estimate_antenna(ts, hp), sets))
    else:
        results = [estimate_antenna(ts, hp) for ts in sets]

    gain = label_gain(owned, cfg)
    lambda_hat = np.stack([col for col, _ in results], axis=1) / gain
    traces = [model.loss_trace for _, model in results]
    logger.info("Stage 1 user %d: %d antennas, label gain %.4f, mean final loss %.4g",
                k, antennas, gain, float(np.mean([t[-1] for t in traces])))
    return Stage1Estimate(lambda_hat=lambda_hat, loss_traces=traces, user=k)
