import numpy as np
import pytest

from testbench.airlink.config import SystemConfig
from testbench.airlink.pilots import NO_USER, build_pilot_book, qpsk
from testbench.errors import ChannelIndexError, ConfigError


def test_qpsk_alphabet(rng):
    x = qpsk(rng, (50, 8))
    assert x.shape == (50, 8)
    np.testing.assert_allclose(np.abs(x), 1.0)
    assert set(np.round(x.real * np.sqrt(2)).ravel()) == {-1.0, 1.0}
    assert qpsk(rng, 5).shape == (5,)


def test_slots_are_exclusive_and_leading(small_system, rng):
    book = build_pilot_book(small_system, rng)
    assert book.pilots.shape == (2, 4, 16)
    assert book.slots_of(0) == [0, 1, 2, 3]
    assert book.slots_of(1) == [4, 5, 6, 7]
    assert list(book.slot_map[8:]) == [NO_USER] * 4


def test_pilot_for_slot(small_system, rng):
    book = build_pilot_book(small_system, rng)
    np.testing.assert_array_equal(book.pilot_for_slot(6), book.pilots[1, 2])
    with pytest.raises(ChannelIndexError):
        book.pilot_for_slot(10)
    with pytest.raises(ChannelIndexError):
        book.slots_of(2)


def test_interval_too_short(rng):
    cfg = SystemConfig(users=4, pilots=20, symbols=40)
    with pytest.raises(ConfigError):
        build_pilot_book(cfg, rng)
