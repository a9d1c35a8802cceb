#!/usr/bin/env python3
"""
Unitary DFT by direct matrix multiply.

Both directions are scaled by 1/sqrt(N_f), so Parseval holds exactly and the
eigenvalues of a circulant tap matrix come out as sqrt(N_f) * dft(taps).
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from testbench.errors import DimensionError


@dataclass(frozen=True)
class DftPlan:
    """Forward matrix F and its inverse F^H for one transform size."""

    size: int
    forward: np.ndarray = field(repr=False, compare=False)
    inverse: np.ndarray = field(repr=False, compare=False)

    def check(self, v: np.ndarray) -> None:
        if v.shape[0] != self.size:
            raise DimensionError(f"DFT plan of size {self.size} applied to length {v.shape[0]}")


@lru_cache(maxsize=None)
def make_plan(size: int) -> DftPlan:
    if size < 1:
        raise DimensionError(f"DFT size must be positive, got {size}")
    n = np.arange(size)
    # reduce the phase index mod size before scaling to keep the angles exact
    forward = np.exp(-2j * np.pi * (np.outer(n, n) % size) / size) / np.sqrt(size)
    forward.setflags(write=False)
    inverse = forward.conj().T.copy()
    inverse.setflags(write=False)
    return DftPlan(size=size, forward=forward, inverse=inverse)


def dft(plan: DftPlan, v: np.ndarray) -> np.ndarray:
    """Unitary DFT along axis 0 (columns of a matrix are transformed independently)."""
    v = np.asarray(v)
    plan.check(v)
    return plan.forward @ v


def idft(plan: DftPlan, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v)
    plan.check(v)
    return plan.inverse @ v


def unitarity_error(plan: DftPlan) -> float:
    """max |(F F^H - I)_ij|"""
    return float(np.max(np.abs(plan.forward @ plan.inverse - np.eye(plan.size))))
