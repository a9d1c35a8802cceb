#!/usr/bin/env python3
"""
Exception hierarchy shared by every testbench module.
"""

from typing import Optional


class TestbenchError(Exception):
    """Base class for all testbench failures."""


class DimensionError(TestbenchError, ValueError):
    """Array shapes or lengths do not agree."""


class ChannelIndexError(DimensionError, IndexError):
    """User or antenna index outside the configured range."""


class ConfigError(TestbenchError, ValueError):
    """A configuration value or file is invalid."""


class PilotError(TestbenchError, ValueError):
    """Pilot symbols violate the unit-modulus requirement."""


class MissingSlotsError(TestbenchError, ValueError):
    """Not enough pilot slots were supplied for a user."""


class TapeError(TestbenchError, RuntimeError):
    """Gradient tape used out of order."""


class NonFiniteGradientError(TestbenchError, FloatingPointError):
    """A gradient block contains NaN or Inf."""

    def __init__(self, block: str):
        super().__init__(f"Non-finite gradient in parameter block '{block}'")
        self.block = block


class DivergenceError(TestbenchError, FloatingPointError):
    """Training loss became non-finite."""

    def __init__(self, iteration: int, stage: str = "training"):
        super().__init__(f"{stage} diverged at iteration {iteration}")
        self.iteration = iteration
        self.stage = stage


class EstimationError(TestbenchError):
    """A stage failed inside a sweep; carries the sweep coordinates."""

    def __init__(self, snr_db: float, realization: int, cause: Optional[BaseException] = None):
        super().__init__(f"snr_db={snr_db}, realization={realization}: {cause}")
        self.snr_db = snr_db
        self.realization = realization
        self.cause = cause


class ZeroChannelError(TestbenchError, ValueError):
    """NMSE requested against an all-zero reference channel."""
