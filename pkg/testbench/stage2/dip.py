#!/usr/bin/env python3
"""
Stage 2: deep-image-prior denoiser.

The stage-1 estimate (N_f x M) is replicated over N time slots into an N_f x N x M
tensor. A generator network maps a fixed random grid Z0 through l hidden layers
(1x1 conv, 2x bilinear upsampling, ReLU, batch norm; the last hidden layer skips the
upsampler) and a bare 1x1 output conv to a real grid with 2M channels (Re then Im).
Fitting that output to the tensor for a fixed number of iterations keeps the structured
channel and leaves most of the unstructured noise behind.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from testbench.defaults_config import DEFAULT_DIP
from testbench.errors import ConfigError, DimensionError, DivergenceError
from testbench.numerics.initializers import glorot_uniform
from testbench.numerics.optim import AdamState, adam_step
from testbench.numerics.packing import to_complex, to_real
from testbench.numerics.tape import GradTape, Var, relu, squared_error
from testbench.stage2.layers import (
    BN_MODES,
    batch_norm,
    batch_norm_op,
    conv_1x1,
    conv_op,
    relu_grid,
    upsample_2x_bilinear,
    upsample_op,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DipConfig:
    """Geometry and fit schedule.

    widths[i] is the channel count after hidden layer i (widths[0] is also the channel
    count of Z0); widths[l] = 2M is the output layer's. Hidden layers 0..l-2 double the
    freq and time axes, so the base grid is (N_f, N) / 2^(l-1).
    """

    subcarriers: int
    symbols: int
    antennas: int
    layers: int = DEFAULT_DIP['layers']
    widths: Tuple[int, ...] = ()
    iterations: int = DEFAULT_DIP['iterations']
    learning_rate: float = DEFAULT_DIP['learning_rate']
    seed: int = DEFAULT_DIP['seed']
    noise_low: float = DEFAULT_DIP['noise_low']
    noise_high: float = DEFAULT_DIP['noise_high']
    bn_mode: str = 'batch'
    log_every: int = DEFAULT_DIP['log_every']

    def __post_init__(self):
        if not self.widths:
            hidden = [DEFAULT_DIP['widths'][0]] * self.layers
            object.__setattr__(self, 'widths', tuple(hidden) + (2 * self.antennas,))
        else:
            object.__setattr__(self, 'widths', tuple(int(w) for w in self.widths))
        self.validate()

    def validate(self) -> None:
        l = self.layers
        if l < 1:
            raise ConfigError(f"DIP needs at least one hidden layer, got l={l}")
        if len(self.widths) != l + 1:
            raise ConfigError(f"Expected {l + 1} widths for l={l}, got {len(self.widths)}")
        if min(self.widths) < 1:
            raise ConfigError(f"All widths must be >= 1, got {self.widths}")
        if self.widths[-1] != 2 * self.antennas:
            raise ConfigError(f"Output width must be 2M = {2 * self.antennas}, got {self.widths[-1]}")
        factor = 2 ** (l - 1)
        for name, size in (('N_f', self.subcarriers), ('N', self.symbols)):
            if size < 1 or size % factor:
                raise ConfigError(f"{name}={size} is not divisible by 2^(l-1)={factor}")
        if self.iterations < 0:
            raise ConfigError(f"iterations must be >= 0, got {self.iterations}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.noise_high < self.noise_low:
            raise ConfigError("noise_high must be >= noise_low")
        if self.bn_mode not in BN_MODES:
            raise ConfigError(f"bn_mode must be one of {BN_MODES}, got '{self.bn_mode}'")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")

    @property
    def base_shape(self) -> Tuple[int, int, int]:
        factor = 2 ** (self.layers - 1)
        return self.subcarriers // factor, self.symbols // factor, self.widths[0]

    @property
    def output_shape(self) -> Tuple[int, int, int]:
        return self.subcarriers, self.symbols, self.antennas

    def kernel_shape(self, i: int) -> Tuple[int, int]:
        """theta_i is widths[i] x widths[i-1]; theta_0 reads the widths[0] channels of Z0."""
        return self.widths[i], self.widths[max(i - 1, 0)]


@dataclass
class DipModel:
    """z0 is write-protected; params holds kernel{i}, bias{i} and, for hidden layers, scale{i}, shift{i}."""

    z0: np.ndarray
    params: Dict[str, np.ndarray]

    @property
    def parameter_count(self) -> int:
        return sum(v.size for v in self.params.values())


@dataclass
class ChannelTensor:
    """grid: (N_f, N, M) complex. provenance is 'target' or 'output'."""

    grid: np.ndarray
    provenance: str = 'target'

    def __post_init__(self):
        if self.grid.ndim != 3:
            raise DimensionError(f"Channel tensor must be N_f x N x M, got shape {self.grid.shape}")
        if not np.all(np.isfinite(self.grid)):
            raise DimensionError("Channel tensor contains non-finite entries")


def hidden_names(i: int) -> Tuple[str, str, str, str]:
    return f'kernel{i}', f'bias{i}', f'scale{i}', f'shift{i}'


def init_dip(cfg: DipConfig, rng: np.random.Generator) -> DipModel:
    z0 = rng.uniform(cfg.noise_low, cfg.noise_high, size=cfg.base_shape)
    z0.setflags(write=False)
    params = {}
    for i in range(cfg.layers + 1):
        kernel, bias, scale, shift = hidden_names(i)
        fan_out, fan_in = cfg.kernel_shape(i)
        params[kernel] = glorot_uniform(rng, fan_out, fan_in)
        params[bias] = np.zeros(fan_out)
        if i < cfg.layers:
            params[scale] = np.ones(fan_out)
            params[shift] = np.zeros(fan_out)
    return DipModel(z0=z0, params=params)


def build_tensor(est, symbols: int) -> ChannelTensor:
    """Replicate an N_f x M estimate over `symbols` time slots."""
    if symbols < 1:
        raise DimensionError(f"Need at least one time slot, got {symbols}")
    lam = np.asarray(getattr(est, 'lambda_hat', est))
    if lam.ndim != 2:
        raise DimensionError(f"Estimate must be N_f x M, got shape {lam.shape}")
    grid = np.repeat(lam[:, None, :], symbols, axis=1)
    return ChannelTensor(grid=grid, provenance='target')


def dip_forward_real(model: DipModel, cfg: DipConfig) -> np.ndarray:
    """Real output grid (N_f, N, 2M)."""
    if model.z0.shape != cfg.base_shape:
        raise DimensionError(f"Z0 shape {model.z0.shape} does not match config base {cfg.base_shape}")
    p = model.params
    z = model.z0
    for i in range(cfg.layers):
        kernel, bias, scale, shift = hidden_names(i)
        z = conv_1x1(z, p[kernel], p[bias])
        if i < cfg.layers - 1:
            z = upsample_2x_bilinear(z)
        z = relu_grid(z)
        z = batch_norm(z, p[scale], p[shift], cfg.bn_mode)
    kernel, bias, _, _ = hidden_names(cfg.layers)
    return conv_1x1(z, p[kernel], p[bias])


def dip_forward(model: DipModel, cfg: DipConfig) -> ChannelTensor:
    out = dip_forward_real(model, cfg)
    expected = (cfg.subcarriers, cfg.symbols, 2 * cfg.antennas)
    if out.shape != expected:
        raise DimensionError(f"DIP produced {out.shape}, expected {expected}")
    return ChannelTensor(grid=to_complex(out, axis=2), provenance='output')


def dip_forward_tape(tape: GradTape, params: Dict[str, Var], z0: Var, cfg: DipConfig) -> Var:
    z = z0
    for i in range(cfg.layers):
        kernel, bias, scale, shift = hidden_names(i)
        z = conv_op(z, params[kernel], params[bias])
        if i < cfg.layers - 1:
            z = upsample_op(z)
        z = relu(z)
        z = batch_norm_op(z, params[scale], params[shift], cfg.bn_mode)
    kernel, bias, _, _ = hidden_names(cfg.layers)
    return conv_op(z, params[kernel], params[bias])


def fit_loss(model: DipModel, target: ChannelTensor, cfg: DipConfig) -> float:
    """||Lambda_T - Lambda_hat_T||^2 over real and imaginary parts."""
    diff = dip_forward_real(model, cfg) - to_real(target.grid, axis=2)
    return float(np.sum(diff * diff))


def dip_fit(model: Optional[DipModel], target: ChannelTensor, cfg: DipConfig,
            rng: Optional[np.random.Generator] = None) -> Tuple[DipModel, List[float]]:
    """Adam on the squared l2 fit error for cfg.iterations steps, Z0 held fixed.

    A fresh model is drawn from `rng` when `model` is None.
    """
    if target.grid.shape != cfg.output_shape:
        raise DimensionError(f"Target {target.grid.shape} does not match DIP output {cfg.output_shape}")
    if model is None:
        if rng is None:
            rng = np.random.Generator(np.random.PCG64(cfg.seed))
        model = init_dip(cfg, rng)
    target_real = to_real(target.grid, axis=2)
    params = dict(model.params)
    state = AdamState(learning_rate=cfg.learning_rate)
    trace = []
    for it in range(cfg.iterations):
        tape = GradTape()
        variables = {name: tape.watch(name, value) for name, value in params.items()}
        out = dip_forward_tape(tape, variables, tape.constant(model.z0), cfg)
        loss = squared_error(out, tape.constant(target_real))
        value = float(loss.value)
        if not np.isfinite(value):
            raise DivergenceError(it, stage="DIP fit")
        trace.append(value)
        if cfg.log_every and it % cfg.log_every == 0:
            logger.debug("DIP iteration %d loss %.6g", it, value)
        params = adam_step(state, params, tape.backward(loss))
    fitted = DipModel(z0=model.z0, params=params)
    if trace:
        logger.debug("DIP fit: %d iterations, loss %.6g -> %.6g", len(trace), trace[0], trace[-1])
    return fitted, trace


def extract_estimate(tensor: ChannelTensor) -> np.ndarray:
    """The N_f x M slice at the first time index."""
    return tensor.grid[:, 0, :]


def run_stage2(est, cfg: DipConfig,
               rng: Optional[np.random.Generator] = None) -> Tuple[np.ndarray, List[float]]:
    """Denoise a stage-1 estimate: build the tensor, fit, take the first time slice."""
    target = build_tensor(est, cfg.symbols)
    fitted, trace = dip_fit(None, target, cfg, rng)
    return extract_estimate(dip_forward(fitted, cfg)), trace


def dip_parameter_count(cfg: DipConfig) -> int:
    """Kernels, biases and batch-norm scale/shift."""
    total = 0
    for i in range(cfg.layers + 1):
        fan_out, fan_in = cfg.kernel_shape(i)
        total += fan_out * fan_in + fan_out
        if i < cfg.layers:
            total += 2 * fan_out
    return total
