"""
Default values for the one-bit channel-estimation testbench.

Every field of the YAML experiment config falls back to the constants below, so an
empty config file reproduces the four-user, sixteen-antenna, 64-subcarrier scenario.

Modify these values to change what a minimal config means.
"""

# Extended Pedestrian A (3GPP LTE) power-delay profile
EPA_DELAYS_NS = [0, 30, 70, 90, 110, 190, 410]
EPA_POWERS_DB = [0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8]

# LTE subcarrier spacing; sample period is 1 / (N_f * spacing)
SUBCARRIER_SPACING_HZ = 15e3

# System model
DEFAULT_SYSTEM = {
    'users': 4,
    'antennas': 16,
    'subcarriers': 64,
    'symbols': 80,
    'pilots': 20,
    'snr_db': 10.0,
    'seed': 0,
    'tap_profile': 'epa',
}

# Stage 1: per-antenna supervised networks
DEFAULT_STAGE1 = {
    'epochs': 500,
    'learning_rate': 1e-3,
    'generated_samples': 64,
    'seed': 1,
    'workers': 1,
    'log_every': 100,
}

# Stage 2: deep image prior
DEFAULT_DIP = {
    'layers': 5,
    'widths': [128, 128, 128, 128, 128],
    'symbols': 64,
    'iterations': 150,
    'learning_rate': 0.01,
    'seed': 2,
    'noise_low': 0.0,
    'noise_high': 0.1,
    'log_every': 50,
}

# Adaptive-moment optimizer
ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8

# Batch-norm variance floor
BATCH_NORM_EPS = 1e-5

# Sweep
METHODS = ['pipeline', 'stage1-only', 'ls-unquantized', 'bussgang-ls']

DEFAULT_EXPERIMENT = {
    'snr_db': [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
    'realizations': 20,
    'methods': list(METHODS),
    'users': 'all',
    'output': 'nmse_report.csv',
    'seed': 0,
    'workers': 1,
}

# Largest SNR points x realizations product a single /api/sweep request may run
API_MAX_SWEEP_RUNS = 40

# Reported NMSE never goes below this
NMSE_FLOOR_DB = -100.0

# Order in which a realization's stream is split into named children
STREAM_NAMES = ['channel', 'pilots', 'noise', 'stage1', 'stage2']
