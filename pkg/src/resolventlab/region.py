"""Sector geometry for the spectral parameter.

A point z of the open sector  Xi = {0 < arg z < 2*pi/m}  is sent to
zeta = z**m, which ranges over C minus [0, inf).  Xi_delta is the part of the
sector at distance >= delta from both boundary rays.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import LabError

TWO_PI = 2.0 * math.pi


def _check_order(m):
    if int(m) != m or m < 2 or m % 2:
        raise LabError(f"operator order m must be an even integer >= 2, got {m!r}")
    return int(m)


@dataclass(frozen=True)
class SectorParams:
    m: int
    delta: float = 0.0

    def __post_init__(self):
        _check_order(self.m)
        if not self.delta >= 0:
            raise LabError(f"delta must be nonnegative, got {self.delta!r}")

    def require_positive_delta(self):
        if self.delta <= 0:
            raise LabError("this operation needs delta > 0")


@dataclass(frozen=True)
class SpectralPoint:
    z: complex
    sector: SectorParams
    zeta: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "zeta", power(self.z, self.sector.m))

    @property
    def member(self):
        return xi_membership(self.z, self.sector)


def power(z, m):
    """z**m by repeated multiplication (no exp/log branch choices)."""
    out = 1.0 + 0.0j
    base = complex(z)
    k = int(m)
    while k:
        if k & 1:
            out *= base
        base *= base
        k >>= 1
    return out


def arg2pi(z):
    """Argument of z taken in [0, 2*pi)."""
    a = cmath.phase(z)
    return a + TWO_PI if a < 0 else a


def _ray_distances(z, m):
    rot = cmath.exp(-1j * TWO_PI / m)
    return z.imag, -(z * rot).imag


def xi_membership(z, params):
    """True iff z lies in Xi_delta (boundary distance == delta counts)."""
    z = complex(z)
    if z == 0:
        return False
    m = params.m
    d1, d2 = _ray_distances(z, m)
    a = arg2pi(z)
    in_sector = 0.0 < a < TWO_PI / m
    if params.delta == 0:
        return in_sector
    return in_sector and d1 >= params.delta and d2 >= params.delta


def dist_to_sector_boundary(z, m):
    """Distance from z in the closed sector to the two boundary rays."""
    m = _check_order(m)
    z = complex(z)
    d1, d2 = _ray_distances(z, m)
    # the aperture 2*pi/m is at most pi, so both ray distances are >= 0
    # exactly on the closed sector
    if min(d1, d2) < -1e-14 * abs(z):
        raise LabError(f"z={z} lies outside the closed sector of angle 2*pi/{m}")
    return max(0.0, min(d1, d2))


def map_to_zeta(z, m):
    return power(z, _check_order(m))


def inverse_map(zeta, m):
    """The unique z in Xi with z**m == zeta."""
    m = _check_order(m)
    zeta = complex(zeta)
    if zeta.imag == 0 and zeta.real >= 0:
        raise LabError(f"zeta={zeta} lies on [0, inf), outside the image of the sector")
    r = abs(zeta) ** (1.0 / m)
    return cmath.rect(r, arg2pi(zeta) / m)


def _boundary_parameter(alpha, delta, m):
    """Largest real t with Re((t + i*delta)**m) == alpha."""
    # descending coefficients of t: Re((t + i d)^m) = sum_k C(m,2k) (-d^2)^k t^(m-2k)
    coeffs = np.zeros(m + 1)
    for k in range(m // 2 + 1):
        coeffs[2 * k] = math.comb(m, 2 * k) * (-delta * delta) ** k
    coeffs[m] -= alpha
    roots = np.roots(coeffs)
    real = roots[np.abs(roots.imag) <= 1e-7 * (1 + np.abs(roots))].real
    if real.size == 0:
        raise LabError(f"Re zeta = {alpha} is not reached on the boundary curve")
    t = real.max()
    for _ in range(4):
        val = power(complex(t, delta), m).real - alpha
        der = (m * power(complex(t, delta), m - 1)).real
        if der == 0:
            break
        t -= val / der
    return t


def parabolic_boundary_profile(alpha_list, params):
    """Images of the lower boundary line {Im z = delta} of Xi_delta.

    For every requested Re(zeta) value returns (Re zeta, Im zeta, ratio) with
    ratio = Im zeta / (m * delta * (Re zeta)**((m - 1)/m)), which tends to 1.
    """
    params.require_positive_delta()
    m, d = params.m, params.delta
    rows = []
    for alpha in alpha_list:
        if not alpha > 0:
            raise LabError(f"profile abscissae must be positive, got {alpha!r}")
        t = _boundary_parameter(float(alpha), d, m)
        zeta = power(complex(t, d), m)
        ratio = zeta.imag / (m * d * zeta.real ** ((m - 1) / m))
        rows.append((zeta.real, zeta.imag, ratio))
    return rows


def boundary_point(t, params):
    """zeta on the mapped boundary at parameter z = t + i*delta."""
    return power(complex(t, params.delta), params.m)
