import numpy as np
import pytest

from testbench.airlink.channel import sample_channel
from testbench.airlink.config import SystemConfig
from testbench.bench.metrics import nmse
from testbench.bench.selftest import dip_gradient_error, tiny_dip_config
from testbench.defaults_config import BATCH_NORM_EPS
from testbench.errors import ConfigError, DimensionError
from testbench.numerics.seeding import make_rng
from testbench.stage1.trainer import Stage1Estimate
from testbench.stage2.dip import (
    ChannelTensor,
    DipConfig,
    build_tensor,
    dip_fit,
    dip_forward,
    dip_parameter_count,
    extract_estimate,
    fit_loss,
    hidden_names,
    init_dip,
    run_stage2,
)


def small_dip(**kwargs):
    fields = dict(subcarriers=16, symbols=8, antennas=2, layers=3, widths=(8, 8, 8, 4),
                  iterations=40)
    fields.update(kwargs)
    return DipConfig(**fields)


def random_estimate(rng, subcarriers=16, antennas=2):
    return rng.standard_normal((subcarriers, antennas)) + 1j * rng.standard_normal((subcarriers, antennas))


def test_default_widths():
    cfg = DipConfig(subcarriers=64, symbols=64, antennas=16)
    assert cfg.widths == (128, 128, 128, 128, 128, 32)
    assert cfg.base_shape == (4, 4, 128)


def test_dimension_chain(rng):
    cfg = small_dip()
    model = init_dip(cfg, rng)
    assert model.z0.shape == (4, 2, 8)
    assert model.params["kernel0"].shape == (8, 8)
    assert model.params["kernel3"].shape == (4, 8)
    assert "scale3" not in model.params
    out = dip_forward(model, cfg)
    assert out.grid.shape == (16, 8, 2)
    assert out.provenance == "output"


@pytest.mark.parametrize("kwargs", [
    {"widths": (8, 8, 8, 6)},
    {"widths": (8, 8, 4)},
    {"subcarriers": 18},
    {"symbols": 6},
    {"layers": 0, "widths": (4,)},
    {"iterations": -1},
    {"learning_rate": 0.0},
    {"noise_low": 0.2, "noise_high": 0.1},
    {"bn_mode": "layer"},
])
def test_invalid_geometry(kwargs):
    with pytest.raises(ConfigError):
        small_dip(**kwargs)


def test_z0_is_write_protected(rng):
    model = init_dip(small_dip(), rng)
    assert np.all((model.z0 >= 0.0) & (model.z0 <= 0.1))
    with pytest.raises(ValueError):
        model.z0[0, 0, 0] = 1.0


def test_tensor_replicates_estimate(rng):
    lam = random_estimate(rng)
    tensor = build_tensor(Stage1Estimate(lambda_hat=lam), 8)
    assert tensor.grid.shape == (16, 8, 2)
    for t in range(8):
        np.testing.assert_array_equal(tensor.grid[:, t, :], lam)
    np.testing.assert_array_equal(extract_estimate(tensor), lam)


def test_tensor_errors(rng):
    with pytest.raises(DimensionError):
        build_tensor(random_estimate(rng), 0)
    with pytest.raises(DimensionError):
        build_tensor(np.ones(4), 2)
    with pytest.raises(DimensionError):
        ChannelTensor(grid=np.full((2, 2, 1), np.nan))


@pytest.mark.parametrize("mode", ["batch", "affine"])
@pytest.mark.parametrize("seed", range(20))
def test_dip_gradients_match_finite_differences(seed, mode):
    assert dip_gradient_error(seed=seed, bn_mode=mode) < 1e-4


def test_fit_reduces_loss(rng):
    cfg = small_dip(iterations=100)
    target = build_tensor(random_estimate(rng), cfg.symbols)
    model = init_dip(cfg, make_rng(0))
    fitted, trace = dip_fit(model, target, cfg)
    assert len(trace) == 100
    assert trace[0] == pytest.approx(fit_loss(model, target, cfg))
    assert fit_loss(fitted, target, cfg) < trace[0]
    assert fitted.z0 is model.z0


def test_fit_is_deterministic(rng):
    cfg = small_dip(iterations=5)
    lam = random_estimate(rng)
    a, _ = run_stage2(lam, cfg, make_rng(3))
    b, _ = run_stage2(lam, cfg, make_rng(3))
    np.testing.assert_array_equal(a, b)
    assert a.shape == (16, 2)


def test_zero_iterations_returns_initial_output(rng):
    cfg = small_dip(iterations=0)
    model = init_dip(cfg, rng)
    target = build_tensor(random_estimate(rng), cfg.symbols)
    fitted, trace = dip_fit(model, target, cfg)
    assert trace == []
    np.testing.assert_array_equal(dip_forward(fitted, cfg).grid, dip_forward(model, cfg).grid)


def test_target_shape_checked(rng):
    cfg = small_dip()
    with pytest.raises(DimensionError):
        dip_fit(None, build_tensor(random_estimate(rng), 4), cfg, rng)


def test_parameter_count(rng):
    cfg = small_dip()
    assert dip_parameter_count(cfg) == init_dip(cfg, rng).parameter_count
    tiny = tiny_dip_config()
    assert dip_parameter_count(tiny) == (9 + 3 + 6) + (9 + 3 + 6) + (6 + 2)


def _upsample_axis(g, axis):
    n = g.shape[axis]
    rows = []
    for j in range(2 * n):
        src = min(max((j + 0.5) / 2.0 - 0.5, 0.0), n - 1.0)
        lo = int(np.floor(src))
        hi = min(lo + 1, n - 1)
        w = src - lo
        rows.append((1.0 - w) * np.take(g, lo, axis=axis) + w * np.take(g, hi, axis=axis))
    return np.stack(rows, axis=axis)


def reference_forward(model, cfg):
    """Layer-by-layer composition written out with einsum and explicit statistics."""
    z = np.array(model.z0)
    for i in range(cfg.layers):
        kernel, bias, scale, shift = (model.params[n] for n in hidden_names(i))
        z = np.einsum("oc,ftc->fto", kernel, z) + bias
        if i < cfg.layers - 1:
            z = _upsample_axis(_upsample_axis(z, 0), 1)
        z = np.where(z > 0.0, z, 0.0)
        mean = z.mean(axis=(0, 1))
        std = np.sqrt(((z - mean) ** 2).mean(axis=(0, 1)) + BATCH_NORM_EPS)
        z = (z - mean) / std * scale + shift
    kernel, bias, _, _ = hidden_names(cfg.layers)
    out = np.einsum("oc,ftc->fto", model.params[kernel], z) + model.params[bias]
    return out[:, :, :cfg.antennas] + 1j * out[:, :, cfg.antennas:]


def test_forward_matches_layer_composition(rng):
    cfg = small_dip()
    model = init_dip(cfg, rng)
    for i in range(cfg.layers):
        _, bias, scale, shift = hidden_names(i)
        model.params[bias] = rng.uniform(-0.05, 0.05, size=model.params[bias].shape)
        model.params[scale] = rng.uniform(0.5, 1.5, size=model.params[scale].shape)
        model.params[shift] = rng.uniform(-0.5, 0.5, size=model.params[shift].shape)
    np.testing.assert_allclose(dip_forward(model, cfg).grid, reference_forward(model, cfg), atol=1e-12)


def test_zero_output_layer_gives_zero_tensor(rng):
    cfg = small_dip()
    model = init_dip(cfg, rng)
    kernel, bias, _, _ = hidden_names(cfg.layers)
    model.params[kernel] = np.zeros_like(model.params[kernel])
    model.params[bias] = np.zeros_like(model.params[bias])
    assert not np.any(dip_forward(model, cfg).grid)


def test_zero_target_is_fitted(rng):
    cfg = DipConfig(subcarriers=4, symbols=4, antennas=1, layers=2, widths=(3, 3, 2), iterations=2000)
    target = build_tensor(np.zeros((4, 1), dtype=complex), cfg.symbols)
    fitted, trace = dip_fit(None, target, cfg, make_rng(8))
    assert trace[0] > 1e-2
    assert fit_loss(fitted, target, cfg) < 1e-6


@pytest.mark.slow
def test_early_stopped_fit_denoises_a_channel():
    system = SystemConfig(users=1, antennas=8, subcarriers=32, symbols=32, pilots=1)
    cfg = DipConfig(subcarriers=32, symbols=32, antennas=8, layers=4, widths=(64, 64, 64, 64, 16),
                    iterations=150)
    wins = 0
    for trial in range(25):
        rng = make_rng(500 + trial)
        truth = sample_channel(system, rng).user_matrix(0)
        sigma2 = float(np.mean(np.abs(truth) ** 2)) / 10.0
        noise = rng.standard_normal(truth.shape) + 1j * rng.standard_normal(truth.shape)
        noisy = truth + np.sqrt(sigma2 / 2.0) * noise
        denoised, _ = run_stage2(noisy, cfg, rng)
        wins += nmse(denoised, truth) < nmse(noisy, truth)
    assert wins >= 20
