#!/usr/bin/env python3
"""
Classical reference estimators.

Both derotate the received spectrum by the known pilot and average over the user's
pilot slots. The unquantized one works on y before the ADC and serves as a lower
bound; the Bussgang one works on the one-bit r and undoes the scalar Bussgang gain.
"""

import logging
from typing import Sequence

import numpy as np

from testbench.airlink.link import QuantizedRxBlock, SlotSignal, bussgang_gain, user_blocks
from testbench.airlink.pilots import PilotBook
from testbench.numerics.dft import dft, make_plan

logger = logging.getLogger(__name__)


def derotate_average(grids: Sequence[np.ndarray], pilots: Sequence[np.ndarray]) -> np.ndarray:
    """Mean over slots of (F g)_n conj(x_n), applied to each antenna column."""
    plan = make_plan(grids[0].shape[0])
    acc = np.zeros(grids[0].shape, dtype=np.complex128)
    for g, x in zip(grids, pilots):
        acc += dft(plan, g) * np.conj(x)[:, None]
    return acc / len(grids)


def ls_unquantized_baseline(slots: Sequence[SlotSignal], book: PilotBook, k: int) -> np.ndarray:
    """N_f x M least-squares estimate from pre-quantizer samples."""
    owned = user_blocks(slots, k)
    return derotate_average([s.y for s in owned], [book.pilot_for_slot(s.slot) for s in owned])


def bussgang_ls_baseline(blocks: Sequence[QuantizedRxBlock], book: PilotBook, k: int,
                         snr_db: float) -> np.ndarray:
    """LS derotation of r / G, with r = G y + d the Bussgang decomposition of the ADC."""
    owned = user_blocks(blocks, k)
    gain = bussgang_gain(snr_db)
    return derotate_average([b.R / gain for b in owned], [book.pilot_for_slot(b.slot) for b in owned])
