#!/usr/bin/env python3
"""
Grid layers of the deep-image-prior network and their tape primitives.

Grids are real arrays shaped (freq, time, space). Every layer acts on the spatial
axis per (freq, time) position, or on the freq/time plane per spatial channel.
"""

from functools import lru_cache

import numpy as np

from testbench.defaults_config import BATCH_NORM_EPS
from testbench.errors import ConfigError, DimensionError
from testbench.numerics.tape import Op, Var

BN_MODES = ('batch', 'affine')


@lru_cache(maxsize=None)
def bilinear_matrix(n: int) -> np.ndarray:
    """(2n, n) interpolation matrix, half-pixel centers, edges clamped."""
    out = np.arange(2 * n)
    src = np.clip((out + 0.5) / 2.0 - 0.5, 0.0, n - 1)
    i0 = np.floor(src).astype(int)
    i1 = np.minimum(i0 + 1, n - 1)
    w = src - i0
    u = np.zeros((2 * n, n))
    np.add.at(u, (out, i0), 1.0 - w)
    np.add.at(u, (out, i1), w)
    u.setflags(write=False)
    return u


def _check_grid(g: np.ndarray) -> None:
    if g.ndim != 3 or min(g.shape) < 1:
        raise DimensionError(f"Expected a non-empty (freq, time, space) grid, got shape {g.shape}")


def upsample_2x_bilinear(g: np.ndarray) -> np.ndarray:
    _check_grid(g)
    uf = bilinear_matrix(g.shape[0])
    ut = bilinear_matrix(g.shape[1])
    tmp = np.tensordot(uf, g, axes=(1, 0))
    return np.tensordot(ut, tmp, axes=(1, 1)).transpose(1, 0, 2)


def conv_1x1(g: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """out[f, t, :] = kernel @ g[f, t, :] + bias."""
    _check_grid(g)
    if kernel.ndim != 2 or kernel.shape[1] != g.shape[2]:
        raise DimensionError(f"Kernel {kernel.shape} does not accept {g.shape[2]} input channels")
    if bias.shape != (kernel.shape[0],):
        raise DimensionError(f"Bias {bias.shape} does not match {kernel.shape[0]} output channels")
    return g @ kernel.T + bias


def batch_norm(g: np.ndarray, scale: np.ndarray, shift: np.ndarray,
               mode: str = 'batch', eps: float = BATCH_NORM_EPS) -> np.ndarray:
    """Per spatial channel: normalize over (freq, time) with this grid's own statistics,
    then scale and shift. mode='affine' skips the normalization."""
    _check_grid(g)
    if scale.shape != (g.shape[2],) or shift.shape != (g.shape[2],):
        raise DimensionError(f"Scale/shift {scale.shape}/{shift.shape} vs {g.shape[2]} channels")
    if mode == 'affine':
        return g * scale + shift
    if mode != 'batch':
        raise ConfigError(f"Unknown batch-norm mode '{mode}', expected one of {BN_MODES}")
    mean = g.mean(axis=(0, 1))
    var = g.var(axis=(0, 1))
    return (g - mean) / np.sqrt(var + eps) * scale + shift


def relu_grid(g: np.ndarray) -> np.ndarray:
    return np.maximum(g, 0.0)


class Upsample2x(Op):
    name = "upsample_2x_bilinear"

    def forward(self, g):
        return upsample_2x_bilinear(g)

    def backward(self, grad, inputs, output):
        g = inputs[0]
        uf = bilinear_matrix(g.shape[0])
        ut = bilinear_matrix(g.shape[1])
        tmp = np.tensordot(uf, grad, axes=(0, 0))
        return (np.tensordot(ut, tmp, axes=(0, 1)).transpose(1, 0, 2),)


class Conv1x1(Op):
    name = "conv_1x1"

    def forward(self, g, kernel, bias):
        return conv_1x1(g, kernel, bias)

    def backward(self, grad, inputs, output):
        g, kernel, _ = inputs
        d_g = grad @ kernel
        d_kernel = grad.reshape(-1, grad.shape[2]).T @ g.reshape(-1, g.shape[2])
        d_bias = grad.sum(axis=(0, 1))
        return d_g, d_kernel, d_bias


class BatchNorm(Op):
    name = "batch_norm"

    def __init__(self, mode: str = 'batch', eps: float = BATCH_NORM_EPS):
        self.mode = mode
        self.eps = eps

    def forward(self, g, scale, shift):
        return batch_norm(g, scale, shift, self.mode, self.eps)

    def backward(self, grad, inputs, output):
        g, scale, _ = inputs
        d_shift = grad.sum(axis=(0, 1))
        if self.mode == 'affine':
            return grad * scale, (grad * g).sum(axis=(0, 1)), d_shift
        n = g.shape[0] * g.shape[1]
        mean = g.mean(axis=(0, 1))
        inv_std = 1.0 / np.sqrt(g.var(axis=(0, 1)) + self.eps)
        xhat = (g - mean) * inv_std
        d_scale = (grad * xhat).sum(axis=(0, 1))
        d_xhat = grad * scale
        d_g = inv_std / n * (n * d_xhat - d_xhat.sum(axis=(0, 1)) - xhat * (d_xhat * xhat).sum(axis=(0, 1)))
        return d_g, d_scale, d_shift


def upsample_op(g: Var) -> Var:
    return g.tape.apply(Upsample2x(), g)


def conv_op(g: Var, kernel: Var, bias: Var) -> Var:
    return g.tape.apply(Conv1x1(), g, kernel, bias)


def batch_norm_op(g: Var, scale: Var, shift: Var, mode: str = 'batch') -> Var:
    return g.tape.apply(BatchNorm(mode), g, scale, shift)
