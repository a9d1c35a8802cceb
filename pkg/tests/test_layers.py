import numpy as np
import pytest

from testbench.errors import ConfigError, DimensionError
from testbench.numerics.tape import GradTape, finite_diff_grad, relative_error, total
from testbench.stage2.layers import (
    batch_norm,
    batch_norm_op,
    bilinear_matrix,
    conv_1x1,
    conv_op,
    upsample_2x_bilinear,
    upsample_op,
)


def test_bilinear_matrix_half_pixel_weights():
    expected = np.array([[1.0, 0.0], [0.75, 0.25], [0.25, 0.75], [0.0, 1.0]])
    np.testing.assert_allclose(bilinear_matrix(2), expected)
    np.testing.assert_allclose(bilinear_matrix(1), np.ones((2, 1)))
    np.testing.assert_allclose(bilinear_matrix(7).sum(axis=1), 1.0)


def test_upsample_doubles_plane_and_keeps_constants():
    g = np.full((3, 5, 2), 4.0)
    out = upsample_2x_bilinear(g)
    assert out.shape == (6, 10, 2)
    np.testing.assert_allclose(out, 4.0)


def test_upsample_is_separable(rng):
    g = rng.standard_normal((4, 3, 2))
    out = upsample_2x_bilinear(g)
    uf, ut = bilinear_matrix(4), bilinear_matrix(3)
    for c in range(2):
        np.testing.assert_allclose(out[:, :, c], uf @ g[:, :, c] @ ut.T)


def test_upsample_reproduces_a_linear_ramp():
    ramp = np.arange(4.0)[None, :, None] + 10.0 * np.arange(3.0)[:, None, None]
    out = upsample_2x_bilinear(np.repeat(ramp, 2, axis=2))
    f = np.arange(6)[:, None] / 2.0 - 0.25
    t = np.arange(8)[None, :] / 2.0 - 0.25
    expected = t + 10.0 * f
    for c in range(2):
        np.testing.assert_allclose(out[1:-1, 1:-1, c], expected[1:-1, 1:-1], atol=1e-12)
    np.testing.assert_allclose(out[0, 0, :], 0.0, atol=1e-12)
    np.testing.assert_allclose(out[-1, -1, :], 23.0, atol=1e-12)


def test_conv_acts_on_space_axis(rng):
    g = rng.standard_normal((2, 3, 4))
    kernel = rng.standard_normal((5, 4))
    bias = rng.standard_normal(5)
    out = conv_1x1(g, kernel, bias)
    assert out.shape == (2, 3, 5)
    np.testing.assert_allclose(out[1, 2], kernel @ g[1, 2] + bias)
    with pytest.raises(DimensionError):
        conv_1x1(g, np.ones((5, 3)), bias)


def test_batch_norm_statistics(rng):
    g = 3.0 + 2.0 * rng.standard_normal((8, 8, 3))
    out = batch_norm(g, np.array([1.0, 2.0, 0.5]), np.array([0.0, 1.0, -1.0]))
    np.testing.assert_allclose(out.mean(axis=(0, 1)), [0.0, 1.0, -1.0], atol=1e-12)
    np.testing.assert_allclose(out.std(axis=(0, 1)), [1.0, 2.0, 0.5], rtol=1e-4)


def test_affine_mode_skips_normalization(rng):
    g = rng.standard_normal((2, 2, 2))
    out = batch_norm(g, np.array([2.0, 3.0]), np.array([1.0, 0.0]), mode="affine")
    np.testing.assert_allclose(out, g * [2.0, 3.0] + [1.0, 0.0])
    with pytest.raises(ConfigError):
        batch_norm(g, np.ones(2), np.zeros(2), mode="group")


def test_grids_must_be_three_dimensional():
    with pytest.raises(DimensionError):
        upsample_2x_bilinear(np.ones((4, 4)))


def _check_op(build, params, rng):
    """Compare tape gradients of sum(weights * op(...)) against central differences."""
    tape = GradTape()
    variables = {name: tape.watch(name, value) for name, value in params.items()}
    out = build(variables)
    weights = rng.standard_normal(out.shape)
    analytic = tape.backward(total(out * tape.constant(weights)))

    def loss(p):
        t = GradTape()
        return float(np.sum(build({n: t.watch(n, v) for n, v in p.items()}).value * weights))

    numeric = finite_diff_grad(loss, params, step=1e-5)
    for name in params:
        assert np.max(relative_error(analytic[name], numeric[name], floor=1e-4)) < 1e-5


def test_upsample_gradient(rng):
    _check_op(lambda v: upsample_op(v["g"]), {"g": rng.standard_normal((3, 2, 2))}, rng)


def test_conv_gradient(rng):
    params = {"g": rng.standard_normal((2, 3, 3)), "k": rng.standard_normal((2, 3)),
              "b": rng.standard_normal(2)}
    _check_op(lambda v: conv_op(v["g"], v["k"], v["b"]), params, rng)


@pytest.mark.parametrize("mode", ["batch", "affine"])
def test_batch_norm_gradient(mode, rng):
    params = {"g": rng.standard_normal((3, 3, 2)), "s": rng.uniform(0.5, 1.5, 2),
              "t": rng.standard_normal(2)}
    _check_op(lambda v: batch_norm_op(v["g"], v["s"], v["t"], mode), params, rng)
