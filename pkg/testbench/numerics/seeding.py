#!/usr/bin/env python3
"""
Deterministic random streams.

Split rule: realization r of a sweep with master seed s and scenario seed c uses
SeedSequence((s, c), spawn_key=(r,)). That sequence spawns one child per name in
STREAM_NAMES, in that order, so the channel, pilot, noise and network-initialization
draws of a realization never depend on how many other realizations exist or on
which worker runs them.
"""

import logging
from typing import Dict, Optional

import numpy as np

from testbench.defaults_config import STREAM_NAMES

logger = logging.getLogger(__name__)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def interval_streams(master_seed: int, realization: int,
                     scenario_seed: Optional[int] = None) -> Dict[str, np.random.Generator]:
    """Named generators for one coherence interval."""
    entropy = master_seed if scenario_seed is None else (master_seed, scenario_seed)
    root = np.random.SeedSequence(entropy, spawn_key=(realization,))
    children = root.spawn(len(STREAM_NAMES))
    logger.debug("Derived %d streams for realization %d (seed %d)",
                 len(children), realization, master_seed)
    return {name: np.random.Generator(np.random.PCG64(child))
            for name, child in zip(STREAM_NAMES, children)}


def derive_seed(rng: np.random.Generator) -> int:
    """Draw a 63-bit seed from a generator for a component that takes an integer seed."""
    return int(rng.integers(0, 2 ** 63 - 1))


def mixed_rng(seed: int, stream: np.random.Generator) -> np.random.Generator:
    """Generator keyed on a configured seed and one draw of a realization stream.

    Changing either the configured seed or the realization changes the result.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, derive_seed(stream)))))
