#!/usr/bin/env python3
"""
Multipath channel realizations and their frequency responses.

The time-domain taps h_k[m] define a circulant matrix H_k[m]. Under the unitary DFT,
F H F^H is diagonal with entries sqrt(N_f) * dft(h), which is what lambda stores.
"""

from dataclasses import dataclass

import numpy as np

from testbench.airlink.config import SystemConfig
from testbench.errors import ChannelIndexError, DimensionError
from testbench.numerics.dft import dft, make_plan


@dataclass(frozen=True)
class ChannelRealization:
    """taps: (K, M, N_f) complex, zero-padded impulse responses.
    lam: (K, N_f, M) complex, column m of lam[k] is diag(F H_k[m] F^H).
    """

    taps: np.ndarray
    lam: np.ndarray

    @property
    def users(self) -> int:
        return self.taps.shape[0]

    @property
    def antennas(self) -> int:
        return self.taps.shape[1]

    @property
    def subcarriers(self) -> int:
        return self.taps.shape[2]

    def user_matrix(self, k: int) -> np.ndarray:
        """Lambda_k as an N_f x M matrix."""
        self._check_user(k)
        return self.lam[k]

    def _check_user(self, k: int) -> None:
        if not 0 <= k < self.users:
            raise ChannelIndexError(f"User index {k} outside [0, {self.users})")


def taps_to_response(taps: np.ndarray) -> np.ndarray:
    """Eigenvalues of the circulant matrix built from `taps` (axis 0), in DFT order."""
    taps = np.asarray(taps)
    plan = make_plan(taps.shape[0])
    return np.sqrt(plan.size) * dft(plan, taps)


def circulant(taps: np.ndarray) -> np.ndarray:
    """N_f x N_f circulant matrix whose first column is `taps`."""
    n = taps.shape[0]
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    return taps[idx]


def channel_from_taps(taps: np.ndarray) -> ChannelRealization:
    taps = np.asarray(taps, dtype=np.complex128)
    if taps.ndim != 3:
        raise DimensionError(f"Taps must be (K, M, N_f), got shape {taps.shape}")
    # (K, M, N_f) -> DFT along N_f -> (K, N_f, M)
    lam = np.stack([taps_to_response(taps[k].T) for k in range(taps.shape[0])])
    return ChannelRealization(taps=taps, lam=lam)


def sample_channel(cfg: SystemConfig, rng: np.random.Generator) -> ChannelRealization:
    """Independent circularly-symmetric Gaussian taps with the profile's powers."""
    taps = np.zeros((cfg.users, cfg.antennas, cfg.subcarriers), dtype=np.complex128)
    delays = np.array(cfg.tap_delays)
    powers = np.array(cfg.tap_powers)
    shape = (cfg.users, cfg.antennas, len(delays))
    draws = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(powers / 2.0)
    taps[:, :, delays] = draws
    return channel_from_taps(taps)


def freq_response(ch: ChannelRealization, k: int, m: int) -> np.ndarray:
    """lambda_k[m] = diag(Lambda_k[m])."""
    ch._check_user(k)
    if not 0 <= m < ch.antennas:
        raise ChannelIndexError(f"Antenna index {m} outside [0, {ch.antennas})")
    return ch.lam[k, :, m]
