#!/usr/bin/env python3
"""
Per-antenna fully connected network: 2N_f -> 4N_f (ReLU) -> 4N_f (ReLU) -> 2N_f (linear).
"""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from testbench.errors import DimensionError
from testbench.numerics.initializers import glorot_uniform
from testbench.numerics.tape import GradTape, Var, dense, relu

WEIGHT_NAMES = ('phi1', 'phi2', 'phi3')
BIAS_NAMES = ('bias1', 'bias2', 'bias3')
PARAM_NAMES = ('phi1', 'bias1', 'phi2', 'bias2', 'phi3', 'bias3')


@dataclass
class MlpModel:
    """Weights Phi_1..Phi_3 (out x in) and biases of one antenna's network."""

    params: Dict[str, np.ndarray]
    loss_trace: List[float] = field(default_factory=list)

    def __post_init__(self):
        missing = [n for n in PARAM_NAMES if n not in self.params]
        if missing:
            raise DimensionError(f"MLP is missing parameter blocks {missing}")
        prev = self.params['phi1'].shape[1]
        for w_name, b_name in zip(WEIGHT_NAMES, BIAS_NAMES):
            w = self.params[w_name]
            if w.ndim != 2 or w.shape[1] != prev:
                raise DimensionError(f"{w_name} has shape {w.shape}, expected (*, {prev})")
            if self.params[b_name].shape != (w.shape[0],):
                raise DimensionError(f"{b_name} has shape {self.params[b_name].shape}")
            prev = w.shape[0]

    @property
    def input_size(self) -> int:
        return self.params['phi1'].shape[1]

    @property
    def output_size(self) -> int:
        return self.params['phi3'].shape[0]

    @property
    def weight_count(self) -> int:
        """Weight-matrix elements only (32 N_f^2 for the standard layout)."""
        return sum(self.params[n].size for n in WEIGHT_NAMES)

    @property
    def bias_count(self) -> int:
        return sum(self.params[n].size for n in BIAS_NAMES)


def init_mlp(subcarriers: int, rng: np.random.Generator) -> MlpModel:
    """Standard layout for N_f subcarriers; biases start at zero."""
    n_in = 2 * subcarriers
    n_hidden = 4 * subcarriers
    sizes = [(n_hidden, n_in), (n_hidden, n_hidden), (n_in, n_hidden)]
    params = {}
    for (w_name, b_name), (fan_out, fan_in) in zip(zip(WEIGHT_NAMES, BIAS_NAMES), sizes):
        params[w_name] = glorot_uniform(rng, fan_out, fan_in)
        params[b_name] = np.zeros(fan_out)
    return MlpModel(params=params)


def anchor_output(model: MlpModel, labels: np.ndarray) -> MlpModel:
    """Zero Phi_3 and set the output bias to the mean label.

    The anchored network returns the label mean for every input; training then only
    adds input-dependent structure the labels actually support.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if labels.ndim != 2 or labels.shape[1] != model.output_size:
        raise DimensionError(f"Labels {labels.shape} do not match output width {model.output_size}")
    params = dict(model.params)
    params['phi3'] = np.zeros_like(params['phi3'])
    params['bias3'] = labels.mean(axis=0)
    return MlpModel(params=params, loss_trace=list(model.loss_trace))


def mlp_forward(model: MlpModel, x: np.ndarray) -> np.ndarray:
    """sigma3(Phi3 sigma2(Phi2 sigma1(Phi1 x))) for one input vector or a batch of rows."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.input_size:
        raise DimensionError(f"MLP expects input width {model.input_size}, got {x.shape[-1]}")
    p = model.params
    h = np.maximum(x @ p['phi1'].T + p['bias1'], 0.0)
    h = np.maximum(h @ p['phi2'].T + p['bias2'], 0.0)
    return h @ p['phi3'].T + p['bias3']


def mlp_forward_tape(tape: GradTape, params: Dict[str, Var], x: Var) -> Var:
    """Same network as mlp_forward, recorded on a tape."""
    h = relu(dense(x, params['phi1'], params['bias1']))
    h = relu(dense(h, params['phi2'], params['bias2']))
    return dense(h, params['phi3'], params['bias3'])


def watch_params(tape: GradTape, model_params: Dict[str, np.ndarray]) -> Dict[str, Var]:
    return {name: tape.watch(name, model_params[name]) for name in PARAM_NAMES}
