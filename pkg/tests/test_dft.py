import numpy as np
import pytest

from testbench.errors import DimensionError
from testbench.numerics.dft import dft, idft, make_plan, unitarity_error


@pytest.mark.parametrize("size", [1, 2, 16, 64])
def test_plan_is_unitary(size):
    assert unitarity_error(make_plan(size)) < 1e-12


def test_matches_orthonormal_fft(rng):
    v = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    np.testing.assert_allclose(dft(make_plan(32), v), np.fft.fft(v, norm="ortho"), atol=1e-12)
    np.testing.assert_allclose(idft(make_plan(32), v), np.fft.ifft(v, norm="ortho"), atol=1e-12)


def test_impulse_transforms_to_constant():
    e0 = np.zeros(16)
    e0[0] = 1.0
    np.testing.assert_allclose(dft(make_plan(16), e0), np.full(16, 0.25), atol=1e-15)


def test_inverse_and_parseval(rng):
    plan = make_plan(64)
    v = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    f = dft(plan, v)
    np.testing.assert_allclose(idft(plan, f), v, atol=1e-12)
    assert np.isclose(np.vdot(f, f).real, np.vdot(v, v).real)


def test_matrix_columns_transform_independently(rng):
    plan = make_plan(8)
    m = rng.standard_normal((8, 3)) + 1j * rng.standard_normal((8, 3))
    out = dft(plan, m)
    for j in range(3):
        np.testing.assert_allclose(out[:, j], dft(plan, m[:, j]))


def test_plan_is_cached_and_read_only():
    plan = make_plan(16)
    assert make_plan(16) is plan
    with pytest.raises(ValueError):
        plan.forward[0, 0] = 0.0


def test_length_mismatch():
    with pytest.raises(DimensionError):
        dft(make_plan(8), np.ones(4))


def test_nonpositive_size():
    with pytest.raises(DimensionError):
        make_plan(0)
