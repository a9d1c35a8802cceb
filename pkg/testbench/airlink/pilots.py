#!/usr/bin/env python3
"""
Pilot generation and time-division slot assignment.
"""

from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from testbench.airlink.config import SystemConfig
from testbench.errors import ConfigError, ChannelIndexError

NO_USER = -1


def qpsk(rng: np.random.Generator, shape: Union[int, Tuple[int, ...]]) -> np.ndarray:
    """i.i.d. unit-modulus QPSK symbols (+-1 +-j)/sqrt(2)."""
    shape = (shape,) if isinstance(shape, int) else tuple(shape)
    bits = rng.integers(0, 2, size=shape + (2,))
    signs = 1.0 - 2.0 * bits
    return (signs[..., 0] + 1j * signs[..., 1]) / np.sqrt(2.0)


@dataclass(frozen=True)
class PilotBook:
    """pilots: (K, N_t, N_f) frequency-domain pilot vectors.
    slot_map: length-N array, owner user of each slot or NO_USER.
    """

    pilots: np.ndarray
    slot_map: np.ndarray

    @property
    def users(self) -> int:
        return self.pilots.shape[0]

    @property
    def pilots_per_user(self) -> int:
        return self.pilots.shape[1]

    def slots_of(self, k: int) -> List[int]:
        """Slots owned by user k, in pilot order (p = 0..N_t-1)."""
        if not 0 <= k < self.users:
            raise ChannelIndexError(f"User index {k} outside [0, {self.users})")
        return [int(s) for s in np.flatnonzero(self.slot_map == k)]

    def pilot_for_slot(self, slot: int) -> np.ndarray:
        k = int(self.slot_map[slot])
        if k == NO_USER:
            raise ChannelIndexError(f"Slot {slot} carries no pilot")
        return self.pilots[k, self.slots_of(k).index(slot)]


def build_pilot_book(cfg: SystemConfig, rng: np.random.Generator) -> PilotBook:
    """Per-user QPSK pilots on exclusive slots at the start of the coherence interval.

    User k owns slots k*N_t .. (k+1)*N_t - 1; the remaining N - K*N_t slots carry no pilot.
    """
    needed = cfg.users * cfg.pilots
    if needed > cfg.symbols:
        raise ConfigError(
            f"Coherence interval too short: K*N_t = {needed} pilot slots > N = {cfg.symbols}")
    pilots = qpsk(rng, (cfg.users, cfg.pilots, cfg.subcarriers))
    slot_map = np.full(cfg.symbols, NO_USER, dtype=int)
    slot_map[:needed] = np.repeat(np.arange(cfg.users), cfg.pilots)
    return PilotBook(pilots=pilots, slot_map=slot_map)
