#!/usr/bin/env python3
"""
Adaptive-moment (Adam) optimizer over named real parameter blocks.
"""

from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np

from testbench.defaults_config import ADAM_BETAS, ADAM_EPS
from testbench.errors import DimensionError, NonFiniteGradientError


@dataclass
class AdamState:
    learning_rate: float = 1e-3
    betas: Tuple[float, float] = ADAM_BETAS
    eps: float = ADAM_EPS
    step: int = 0
    first_moment: Dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: Dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(state: AdamState, params: Dict[str, np.ndarray],
              grads: Dict[str, np.ndarray]) -> Dict[str, np.ndarray]:
    """One bias-corrected Adam update. Returns new parameter arrays; advances state.step."""
    for name, value in params.items():
        if name not in grads:
            raise DimensionError(f"No gradient supplied for parameter block '{name}'")
        if grads[name].shape != value.shape:
            raise DimensionError(
                f"Gradient shape {grads[name].shape} != parameter shape {value.shape} for '{name}'")
        if not np.all(np.isfinite(grads[name])):
            raise NonFiniteGradientError(name)

    beta1, beta2 = state.betas
    state.step += 1
    correction1 = 1.0 - beta1 ** state.step
    correction2 = 1.0 - beta2 ** state.step

    updated = {}
    for name, value in params.items():
        g = grads[name]
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None:
            m = np.zeros_like(value)
            v = np.zeros_like(value)
        m = beta1 * m + (1.0 - beta1) * g
        v = beta2 * v + (1.0 - beta2) * g * g
        state.first_moment[name] = m
        state.second_moment[name] = v
        m_hat = m / correction1
        v_hat = v / correction2
        updated[name] = value - state.learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    return updated
