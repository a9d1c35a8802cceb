"""
One-bit massive MIMO uplink channel-estimation testbench.

Simulates OFDM pilots through a multipath channel into one-bit ADCs, estimates the
channel with per-antenna supervised networks followed by a deep-image-prior denoiser,
and benchmarks NMSE against classical baselines.
"""

__version__ = "1.0.0"
