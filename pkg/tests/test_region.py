import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from resolventlab import LabError
from resolventlab.region import (
    SectorParams,
    SpectralPoint,
    boundary_point,
    dist_to_sector_boundary,
    inverse_map,
    map_to_zeta,
    parabolic_boundary_profile,
    power,
    xi_membership,
)

orders = st.sampled_from([2, 4, 6, 8])


def sector_point(m, radius, frac):
    return cmath.rect(radius, frac * 2 * math.pi / m)


def test_sector_params_validation():
    for bad in (0, 1, 3, 5, 2.5):
        with pytest.raises(LabError):
            SectorParams(bad)
    with pytest.raises(LabError):
        SectorParams(2, -0.1)
    with pytest.raises(LabError):
        SectorParams(2, 0.0).require_positive_delta()


def test_membership_examples():
    assert xi_membership(1j, SectorParams(2, 0.1))
    assert not xi_membership(1, SectorParams(2, 0.1))
    assert xi_membership(cmath.exp(1j * math.pi / 4), SectorParams(4, 0.1))
    assert not xi_membership(0, SectorParams(2, 0.0))
    assert not xi_membership(-1j, SectorParams(2, 0.0))


def test_boundary_distance_counts_as_member():
    assert xi_membership(3 + 0.5j, SectorParams(2, 0.5))


def test_distance_examples():
    assert dist_to_sector_boundary(3 + 4j, 2) == pytest.approx(4.0, rel=1e-15)
    assert dist_to_sector_boundary(1 + 1j, 4) == pytest.approx(1.0, rel=1e-15)
    assert dist_to_sector_boundary(2 * cmath.exp(1j * math.pi / 4), 4) == pytest.approx(
        2 * math.sin(math.pi / 4), rel=1e-14)
    assert dist_to_sector_boundary(5.0, 2) == 0.0


def test_distance_rejects_outside():
    with pytest.raises(LabError):
        dist_to_sector_boundary(-1j, 2)
    with pytest.raises(LabError):
        dist_to_sector_boundary(-1 + 1j, 4)


def test_map_examples():
    assert map_to_zeta(1j, 2) == pytest.approx(-1)
    assert inverse_map(-1, 2) == pytest.approx(1j)
    z = cmath.exp(1j * math.pi / 4)
    assert map_to_zeta(z, 4) == pytest.approx(-1, abs=1e-15)
    assert inverse_map(-1, 4) == pytest.approx(z, abs=1e-15)
    for bad in (0.0, 2.0, 1e6):
        with pytest.raises(LabError):
            inverse_map(bad, 4)


def test_spectral_point_caches_zeta():
    p = SpectralPoint(1 + 2j, SectorParams(2))
    assert p.zeta == -3 + 4j
    assert p.member


def test_power_is_exact_for_gaussian_integers():
    assert power(1 + 2j, 2) == -3 + 4j
    assert power(10 + 1j, 4) == 9401 + 3960j
    assert power(3 - 1j, 0) == 1


def test_profile_examples():
    rows = parabolic_boundary_profile([99.0], SectorParams(2, 1.0))
    re, im, ratio = rows[0]
    assert re == pytest.approx(99.0, rel=1e-13)
    assert im == pytest.approx(20.0, rel=1e-12)
    assert ratio == pytest.approx(20 / (2 * math.sqrt(99)), rel=1e-12)
    assert ratio == pytest.approx(1.00504, abs=1e-5)
    re, im, _ = parabolic_boundary_profile([9401.0], SectorParams(4, 1.0))[0]
    assert (re, im) == pytest.approx((9401.0, 3960.0), rel=1e-12)
    assert boundary_point(10.0, SectorParams(4, 1.0)) == 9401 + 3960j


def test_profile_rejects_bad_input():
    with pytest.raises(LabError):
        parabolic_boundary_profile([0.0], SectorParams(2, 1.0))
    with pytest.raises(LabError):
        parabolic_boundary_profile([10.0], SectorParams(2, 0.0))


def test_profile_m2_exact_parabola():
    # Im^2 zeta = 4 delta^2 (Re zeta + delta^2) on the line Im z = delta
    for d in (0.1, 1.0, 3.0):
        for re, im, _ in parabolic_boundary_profile([1.0, 50.0, 1e4], SectorParams(2, d)):
            assert im**2 == pytest.approx(4 * d * d * (re + d * d), rel=1e-11)


@pytest.mark.parametrize("m", [2, 4, 6])
@pytest.mark.parametrize("delta", [0.1, 1.0])
def test_profile_ratio_tends_to_one(m, delta):
    ratios = [r for _, _, r in parabolic_boundary_profile([1e6, 1e9, 1e12, 1e15], SectorParams(m, delta))]
    dev = np.abs(np.array(ratios) - 1.0)
    assert np.all(np.diff(dev) <= 1e-12)
    assert dev[-1] < 0.01


def test_profile_ratio_at_1e6_m6():
    # slow approach for m = 6, delta = 1: ratio ~ 1 + O(delta^2 / t^2)
    ratio = parabolic_boundary_profile([1e6], SectorParams(6, 1.0))[0][2]
    assert ratio == pytest.approx(1.0994, abs=1e-3)


@given(m=orders, r=st.floats(0.01, 1e4), frac=st.floats(0.001, 0.999),
       d1=st.floats(0, 5), d2=st.floats(0, 5))
def test_nesting(m, r, frac, d1, d2):
    lo, hi = sorted((d1, d2))
    z = sector_point(m, r, frac)
    if xi_membership(z, SectorParams(m, hi)):
        assert xi_membership(z, SectorParams(m, lo))


@given(m=orders, r=st.floats(0.01, 1e4), frac=st.floats(0.0, 1.0), s=st.floats(1e-3, 1e3))
def test_distance_scaling(m, r, frac, s):
    z = sector_point(m, r, frac)
    assert dist_to_sector_boundary(s * z, m) == pytest.approx(
        s * dist_to_sector_boundary(z, m), rel=1e-9, abs=1e-12 * s * r)


def test_round_trip_random():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        m = int(rng.choice([2, 4, 6, 8]))
        z = sector_point(m, math.exp(rng.uniform(-3, 3)), rng.uniform(1e-3, 1 - 1e-3))
        back = inverse_map(map_to_zeta(z, m), m)
        worst = max(worst, abs(back - z) / abs(z))
    assert worst < 1e-12


@given(m=orders, r=st.floats(0.1, 100), frac=st.floats(0.01, 0.99))
def test_zeta_off_positive_axis(m, r, frac):
    zeta = map_to_zeta(sector_point(m, r, frac), m)
    assert not (abs(zeta.imag) <= 1e-12 * abs(zeta) and zeta.real > 0)
