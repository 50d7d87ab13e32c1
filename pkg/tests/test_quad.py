import math

import numpy as np
import pytest

from resolventlab import QuadratureError
from resolventlab.quad import integrate


def test_polynomial_exact():
    res = integrate(lambda t: t**5 - 2 * t, 0.0, 2.0)
    assert res.value == pytest.approx(64 / 6 - 4, rel=1e-14)


def test_reversed_and_empty_interval():
    assert integrate(np.exp, 1.0, 0.0).value == pytest.approx(-(math.e - 1), rel=1e-13)
    assert integrate(np.exp, 1.0, 1.0).value == 0.0


def test_batched_values_share_subdivision():
    taus = np.array([0.0, 1.0, 5.0, 20.0])
    res = integrate(lambda t: np.cos(np.multiply.outer(taus, t)), 0.0, 1.0, tol=1e-13)
    expected = np.where(taus == 0, 1.0, np.sin(taus) / np.where(taus == 0, 1, taus))
    assert np.max(np.abs(res.value - expected)) < 1e-13


def test_breakpoints_handle_kinks():
    res = integrate(lambda t: np.abs(t - 0.3), 0.0, 1.0, breakpoints=(0.3,))
    assert res.value == pytest.approx(0.5 * (0.3**2 + 0.7**2), rel=1e-14)


def test_steep_bump_with_relative_floor():
    f = lambda t: np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    ref = 0.1484955067759964  # int_0^1 exp(-1/t) dt = e^-1 - E1(1)
    res = integrate(f, 0.0, 1.0, tol=1e-17, rel_floor=1e-15)
    assert res.value == pytest.approx(ref, rel=1e-13)


def test_raises_with_achieved_error():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda t: np.sign(np.sin(1e4 * t)), 0.0, 1.0, tol=1e-15, max_intervals=64)
    assert info.value.achieved is not None and info.value.achieved > 0


def test_nonfinite_integrand_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda t: np.where(t < 0.5, np.nan, 1.0), 0.0, 1.0)
