#!/usr/bin/env python3
"""
Uplink pilot transmission, one-bit quantization and received-block assembly.

Each pilot slot is owned by exactly one user, so the received signal at antenna m in
a slot of user k is y[m] = H_k[m] F^H x_{k,p} + w[m], computed as a circular
convolution in the time domain.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from testbench.airlink.channel import ChannelRealization, sample_channel
from testbench.airlink.config import SystemConfig
from testbench.airlink.pilots import PilotBook, build_pilot_book
from testbench.errors import DimensionError, MissingSlotsError
from testbench.numerics.dft import idft, make_plan

logger = logging.getLogger(__name__)

QUANT_LEVEL = 1.0 / np.sqrt(2.0)


@dataclass(frozen=True)
class SlotSignal:
    """Unquantized received grid y: (N_f, M), time domain, one column per antenna."""

    slot: int
    user: int
    y: np.ndarray


@dataclass(frozen=True)
class QuantizedRxBlock:
    """R = [r[1] ... r[M]] for one pilot slot. With quantized=False R holds y unchanged."""

    R: np.ndarray
    slot: int
    user: int
    quantized: bool = True

    def __post_init__(self):
        if self.R.ndim != 2:
            raise DimensionError(f"R must be N_f x M, got shape {self.R.shape}")
        if self.quantized:
            ok = (np.allclose(np.abs(self.R.real), QUANT_LEVEL, rtol=0, atol=1e-12)
                  and np.allclose(np.abs(self.R.imag), QUANT_LEVEL, rtol=0, atol=1e-12))
            if not ok:
                raise DimensionError("Quantized block has entries outside {+-1/sqrt2 +- j/sqrt2}")

    @property
    def shape(self):
        return self.R.shape

    def column(self, m: int) -> np.ndarray:
        return self.R[:, m]


@dataclass
class IntervalData:
    """Everything simulated for one coherence interval."""

    cfg: SystemConfig
    channel: ChannelRealization
    book: PilotBook
    slots: List[SlotSignal] = field(default_factory=list)
    blocks: List[QuantizedRxBlock] = field(default_factory=list)


def transmit_block(ch: ChannelRealization, book: PilotBook, cfg: SystemConfig,
                   rng: np.random.Generator, noise: bool = True) -> List[SlotSignal]:
    """Received time-domain grids for every pilot slot, in slot order.

    Noise is drawn for every slot even when noise=False so the stream advances the same
    way regardless of the switch.
    """
    if ch.subcarriers != cfg.subcarriers or book.pilots.shape[2] != cfg.subcarriers:
        raise DimensionError("Channel, pilot book and config disagree on N_f")
    plan = make_plan(cfg.subcarriers)
    sigma2 = cfg.noise_variance
    signals = []
    for k in range(book.users):
        active = np.flatnonzero(np.any(ch.taps[k] != 0, axis=0))
        for p, slot in enumerate(book.slots_of(k)):
            s = idft(plan, book.pilots[k, p])
            y = np.zeros((cfg.subcarriers, ch.antennas), dtype=np.complex128)
            for delay in active:
                y += np.roll(s, delay)[:, None] * ch.taps[k, :, delay][None, :]
            w = (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape)) * np.sqrt(sigma2 / 2.0)
            if noise:
                y = y + w
            signals.append(SlotSignal(slot=slot, user=k, y=y))
    signals.sort(key=lambda sig: sig.slot)
    return signals


def one_bit_quantize(y: np.ndarray) -> np.ndarray:
    """(sign(Re y) + j sign(Im y)) / sqrt(2), elementwise, with sign(0) = +1."""
    y = np.asarray(y)
    re = np.where(np.real(y) >= 0, 1.0, -1.0)
    im = np.where(np.imag(y) >= 0, 1.0, -1.0)
    return (re + 1j * im) * QUANT_LEVEL


def bussgang_gain(snr_db: float, signal_power: float = 1.0) -> float:
    """sqrt(2/pi) / sigma_y for a one-bit quantizer per real dimension,
    with sigma_y^2 = signal_power + 10^(-snr/10)."""
    noise = 0.0 if np.isposinf(snr_db) else 10.0 ** (-snr_db / 10.0)
    return float(np.sqrt(2.0 / np.pi) / np.sqrt(signal_power + noise))


def assemble_rx(columns: Sequence[np.ndarray], slot: int = 0, user: int = 0,
                quantized: bool = True) -> QuantizedRxBlock:
    """Stack per-antenna vectors r[1..M] into the N_f x M matrix R."""
    if not len(columns):
        raise DimensionError("No antenna columns to assemble")
    lengths = {len(c) for c in columns}
    if len(lengths) != 1:
        raise DimensionError(f"Ragged antenna columns with lengths {sorted(lengths)}")
    R = np.stack([np.asarray(c, dtype=np.complex128) for c in columns], axis=1)
    return QuantizedRxBlock(R=R, slot=slot, user=user, quantized=quantized)


def quantize_slots(slots: Sequence[SlotSignal], quantize: bool = True) -> List[QuantizedRxBlock]:
    blocks = []
    for sig in slots:
        cols = [one_bit_quantize(sig.y[:, m]) if quantize else sig.y[:, m]
                for m in range(sig.y.shape[1])]
        blocks.append(assemble_rx(cols, slot=sig.slot, user=sig.user, quantized=quantize))
    return blocks


def simulate_interval(cfg: SystemConfig, streams: Dict[str, np.random.Generator],
                      quantize: bool = True, noise: bool = True) -> IntervalData:
    """Draw a fresh channel and pilot book, transmit every pilot slot, quantize."""
    channel = sample_channel(cfg, streams['channel'])
    book = build_pilot_book(cfg, streams['pilots'])
    slots = transmit_block(channel, book, cfg, streams['noise'], noise=noise)
    blocks = quantize_slots(slots, quantize=quantize)
    logger.debug("Simulated interval: %d pilot slots, sigma^2=%.4g", len(slots), cfg.noise_variance)
    return IntervalData(cfg=cfg, channel=channel, book=book, slots=slots, blocks=blocks)


def user_blocks(blocks: Sequence, k: int) -> List:
    """Blocks (or slot signals) owned by user k, in slot order."""
    owned = [b for b in blocks if b.user == k]
    if not owned:
        raise MissingSlotsError(f"No pilot slots for user {k}")
    return sorted(owned, key=lambda b: b.slot)
