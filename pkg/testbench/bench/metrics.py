#!/usr/bin/env python3
"""
Normalized mean square error.
"""

import numpy as np

from testbench.defaults_config import NMSE_FLOOR_DB
from testbench.errors import DimensionError, ZeroChannelError


def nmse_linear(est: np.ndarray, truth: np.ndarray) -> float:
    """||est - truth||_F^2 / ||truth||_F^2."""
    est = np.asarray(est)
    truth = np.asarray(truth)
    if est.shape != truth.shape:
        raise DimensionError(f"Estimate {est.shape} and truth {truth.shape} differ in shape")
    ref = float(np.sum(np.abs(truth) ** 2))
    if ref == 0.0:
        raise ZeroChannelError("Reference channel is identically zero")
    return float(np.sum(np.abs(est - truth) ** 2)) / ref


def to_db(ratio: float, floor_db: float = NMSE_FLOOR_DB) -> float:
    if ratio <= 0.0:
        return floor_db
    return max(10.0 * np.log10(ratio), floor_db)


def nmse(est: np.ndarray, truth: np.ndarray) -> float:
    """NMSE in dB, floored at NMSE_FLOOR_DB."""
    return to_db(nmse_linear(est, truth))
