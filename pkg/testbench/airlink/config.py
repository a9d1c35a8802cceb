#!/usr/bin/env python3
"""
System configuration and tap-profile handling.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, List, Sequence, Tuple

from testbench.defaults_config import (
    DEFAULT_SYSTEM,
    EPA_DELAYS_NS,
    EPA_POWERS_DB,
    SUBCARRIER_SPACING_HZ,
)
from testbench.errors import ConfigError

logger = logging.getLogger(__name__)

TapProfile = Tuple[Tuple[int, float], ...]


def profile_from_ns_db(delays_ns: Sequence[float], powers_db: Sequence[float],
                       subcarriers: int,
                       spacing_hz: float = SUBCARRIER_SPACING_HZ) -> TapProfile:
    """Map a (delay ns, power dB) profile onto the sample grid of an N_f-point OFDM symbol.

    Delays are rounded to the nearest sample period 1 / (N_f * spacing). Taps landing on
    the same sample are merged by adding their powers; the result is renormalized to
    unit total power.
    """
    if len(delays_ns) != len(powers_db) or not delays_ns:
        raise ConfigError("Tap profile needs matching, non-empty delay and power lists")
    sample_period = 1.0 / (subcarriers * spacing_hz)
    merged = {}
    for delay_ns, power_db in zip(delays_ns, powers_db):
        if delay_ns < 0:
            raise ConfigError(f"Negative tap delay {delay_ns} ns")
        delay = int(round(delay_ns * 1e-9 / sample_period))
        merged[delay] = merged.get(delay, 0.0) + 10.0 ** (power_db / 10.0)
    if len(merged) < len(delays_ns):
        logger.warning("Merged %d taps onto %d sample delays at N_f=%d",
                       len(delays_ns), len(merged), subcarriers)
    return normalize_profile(sorted(merged.items()))


def normalize_profile(taps: Iterable[Tuple[int, float]]) -> TapProfile:
    taps = [(int(d), float(p)) for d, p in taps]
    total = sum(p for _, p in taps)
    if total <= 0:
        raise ConfigError("Tap profile has no power")
    if abs(total - 1.0) > 1e-9:
        logger.warning("Renormalizing tap profile (total power %.6g)", total)
    return tuple((d, p / total) for d, p in taps)


def epa_profile(subcarriers: int) -> TapProfile:
    return profile_from_ns_db(EPA_DELAYS_NS, EPA_POWERS_DB, subcarriers)


@dataclass(frozen=True)
class SystemConfig:
    """K users, M antennas, N_f subcarriers, N symbols per coherence interval, N_t pilots per user."""

    users: int = DEFAULT_SYSTEM['users']
    antennas: int = DEFAULT_SYSTEM['antennas']
    subcarriers: int = DEFAULT_SYSTEM['subcarriers']
    symbols: int = DEFAULT_SYSTEM['symbols']
    pilots: int = DEFAULT_SYSTEM['pilots']
    snr_db: float = DEFAULT_SYSTEM['snr_db']
    seed: int = DEFAULT_SYSTEM['seed']
    tap_profile: TapProfile = field(default=None)

    def __post_init__(self):
        if self.tap_profile is None:
            object.__setattr__(self, 'tap_profile', epa_profile(self.subcarriers))
        else:
            object.__setattr__(self, 'tap_profile',
                               tuple((int(d), float(p)) for d, p in self.tap_profile))
        self.validate()

    def validate(self) -> None:
        if self.users < 1:
            raise ConfigError(f"Need at least one user, got K={self.users}")
        if self.antennas < 1:
            raise ConfigError(f"Need at least one antenna, got M={self.antennas}")
        n_f = self.subcarriers
        if n_f < 1 or n_f & (n_f - 1):
            raise ConfigError(f"Subcarrier count must be a power of two, got {n_f}")
        if self.pilots < 1:
            raise ConfigError(f"Need at least one pilot per user, got N_t={self.pilots}")
        if self.pilots > self.symbols:
            raise ConfigError(f"N_t={self.pilots} exceeds N={self.symbols} symbols per interval")
        if math.isnan(self.snr_db):
            raise ConfigError("snr_db is NaN")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")
        if not self.tap_profile:
            raise ConfigError("Empty tap profile")
        total = sum(p for _, p in self.tap_profile)
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"Tap powers sum to {total}, expected 1")
        if len(set(self.tap_delays)) != len(self.tap_profile):
            raise ConfigError("Tap delays must be distinct")
        for delay, power in self.tap_profile:
            if not 0 <= delay < n_f:
                raise ConfigError(f"Tap delay {delay} outside [0, {n_f})")
            if power < 0:
                raise ConfigError(f"Negative tap power {power}")

    @property
    def noise_variance(self) -> float:
        """sigma^2 = 10^(-SNR/10) per complex sample; zero when snr_db is +inf."""
        if math.isinf(self.snr_db) and self.snr_db > 0:
            return 0.0
        return 10.0 ** (-self.snr_db / 10.0)

    @property
    def tap_delays(self) -> List[int]:
        return [d for d, _ in self.tap_profile]

    @property
    def tap_powers(self) -> List[float]:
        return [p for _, p in self.tap_profile]

    def with_snr(self, snr_db: float) -> "SystemConfig":
        return replace(self, snr_db=snr_db)
