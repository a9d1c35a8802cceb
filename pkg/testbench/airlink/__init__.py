"""Channels, pilots and one-bit quantized received blocks."""

from testbench.airlink.channel import ChannelRealization, freq_response, sample_channel
from testbench.airlink.config import SystemConfig
from testbench.airlink.link import (
    IntervalData,
    QuantizedRxBlock,
    SlotSignal,
    assemble_rx,
    one_bit_quantize,
    simulate_interval,
    transmit_block,
)
from testbench.airlink.pilots import PilotBook, build_pilot_book
