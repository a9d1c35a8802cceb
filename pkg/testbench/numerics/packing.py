"""Complex <-> interleaved-real conversions at the gradient-engine boundary."""

import numpy as np

from testbench.errors import DimensionError


def to_real(z: np.ndarray, axis: int = -1) -> np.ndarray:
    """Concatenate real and imaginary parts along `axis` (length n -> 2n)."""
    z = np.asarray(z)
    return np.concatenate([z.real, z.imag], axis=axis).astype(np.float64)


def to_complex(r: np.ndarray, axis: int = -1) -> np.ndarray:
    """Inverse of to_real."""
    r = np.asarray(r)
    if r.shape[axis] % 2:
        raise DimensionError(f"Cannot split odd length {r.shape[axis]} into real/imag halves")
    re, im = np.split(r, 2, axis=axis)
    return re + 1j * im
