"""Residue calculus for the resolvent multiplier m_z(tau) = 1/(tau**m - z**m).

Poles, the closed-form Fourier transform of m_z, the time-domain resolvent
formula and the partial fraction coefficients, each with an independent
numerical check.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as spi

from . import LabError
from .region import SectorParams, _check_order, power, xi_membership

MAX_PARTIAL_FRACTION_ORDER = 64


def _require_sector(z, m):
    m = _check_order(m)
    if not xi_membership(z, SectorParams(m)):
        raise LabError(f"z={complex(z)} is not in the open sector 0 < arg z < 2*pi/{m}")
    return complex(z), m


def roots_of_unity(m):
    return np.exp(2j * np.pi * np.arange(m) / m)


@dataclass(frozen=True)
class PoleSet:
    taus: np.ndarray
    upper_count: int

    @property
    def upper(self):
        return self.taus[: self.upper_count]

    @property
    def lower(self):
        return self.taus[self.upper_count:]


@dataclass(frozen=True)
class PartialFractionCoeffs:
    A: np.ndarray

    @property
    def m(self):
        return self.A.size


def poles(z, m):
    """All m roots of tau**m = z**m; the first m/2 lie in the upper half-plane."""
    z, m = _require_sector(z, m)
    taus = z * roots_of_unity(m)
    return PoleSet(taus=taus, upper_count=m // 2)


def fourier_transform_mz(t, z, m):
    """Closed form of  int exp(-i t tau) / (tau**m - z**m) dtau  over the real line."""
    z, m = _require_sector(z, m)
    ups = poles(z, m).upper
    w = roots_of_unity(m)[: m // 2]
    pref = 2j * math.pi / (m * power(z, m - 1))
    return complex(pref * np.sum(w * np.exp(1j * abs(float(t)) * ups)))


def fourier_transform_oracle(t, z, m, *, epsabs=1e-13, epsrel=1e-11):
    """Independent value of the same integral by QUADPACK.

    The integrand's real and imaginary parts are even in tau, so the integral
    is 2 * int_0^inf cos(|t| tau) / (tau**m - z**m) dtau.  The half-line is
    split at a few multiples of |z| so the pole bumps sit on a finite piece
    and the remaining tail goes to the Fourier-integral routine.
    """
    z, m = _require_sector(z, m)
    zm = power(z, m)
    w = abs(float(t))

    def part(fn):
        split = 4.0 * abs(z) + 1.0
        pts = [abs(z) * s for s in (0.5, 1.0, 1.5, 2.0)]
        if w == 0:
            head = spi.quad(fn, 0.0, split, points=pts, epsabs=epsabs,
                            epsrel=epsrel, limit=400)[0]
            tail = spi.quad(fn, split, np.inf, epsabs=epsabs, epsrel=epsrel,
                            limit=400)[0]
        else:
            head = spi.quad(lambda x: fn(x) * math.cos(w * x), 0.0, split,
                            points=pts, epsabs=epsabs, epsrel=epsrel, limit=800)[0]
            tail = spi.quad(fn, split, np.inf, weight="cos", wvar=w,
                            epsabs=epsabs, limlst=200)[0]
        return head + tail

    re = part(lambda x: (1.0 / (x**m - zm)).real)
    im = part(lambda x: (1.0 / (x**m - zm)).imag)
    return 2.0 * complex(re, im)


def resolvent_multiplier_identity(tau, z, m):
    """Both sides of  1/(tau**m - z**m) = (i/(m z**(m-1))) sum_k w_k int exp(i|t|tau_k + i t tau) dt.

    The t-integral over the real line splits into two half-line exponentials,
    int_0^inf exp(i t (tau_k +- tau)) dt = i/(tau_k +- tau), convergent
    because Im tau_k > 0.
    """
    if tau < 0:
        raise LabError(f"tau must be nonnegative, got {tau!r}")
    z, m = _require_sector(z, m)
    lhs = 1.0 / (power(complex(tau), m) - power(z, m))
    ups = poles(z, m).upper
    w = roots_of_unity(m)[: m // 2]
    time_integrals = 1j / (ups + tau) + 1j / (ups - tau)
    rhs = 1j / (m * power(z, m - 1)) * np.sum(w * time_integrals)
    return complex(lhs), complex(rhs)


def partial_fractions(m):
    """Coefficients A_k = prod_{l != k} (w_k - w_l)**-1 by the literal product."""
    m = _check_order(m)
    if m > MAX_PARTIAL_FRACTION_ORDER:
        raise LabError(f"partial fractions limited to m <= {MAX_PARTIAL_FRACTION_ORDER}, got {m}")
    w = roots_of_unity(m)
    A = np.empty(m, dtype=complex)
    for k in range(m):
        prod = 1.0 + 0.0j
        for l in range(m):
            if l != k:
                prod *= w[k] - w[l]
        A[k] = 1.0 / prod
    return PartialFractionCoeffs(A)


def partial_fraction_sides(y, z, m, coeffs=None):
    """(lhs, rhs) of 1/(y**m - z**m) = z**(1-m) sum_k A_k / (y - z w_k)."""
    m = _check_order(m)
    coeffs = coeffs or partial_fractions(m)
    y, z = complex(y), complex(z)
    lhs = 1.0 / (power(y, m) - power(z, m))
    rhs = np.sum(coeffs.A / (y - z * roots_of_unity(m))) / power(z, m - 1)
    return complex(lhs), complex(rhs)


def power_sum(z, m, l):
    """sum_{k < m/2} w_k tau_k**(l-1); vanishes for even 2 <= l <= m-2."""
    ups = poles(z, m).upper
    w = roots_of_unity(m)[: m // 2]
    return complex(np.sum(w * ups ** (l - 1)))


def boundary_term(tau, z, m):
    """(2/(tau**m m z**(m-1))) sum_{k<m/2} w_k tau_k**(m-1); equals tau**-m."""
    ups = poles(z, m).upper
    w = roots_of_unity(m)[: m // 2]
    s = np.sum(w * np.array([power(u, m - 1) for u in ups]))
    return complex(2.0 * s / (power(complex(tau), m) * m * power(complex(z), m - 1)))


def fourier_bound(t, z, m):
    """(2 pi/(m |z|**(m-1))) sum_k exp(-|t| Im tau_k)."""
    ups = poles(z, m).upper
    return float(2 * math.pi / (m * abs(z) ** (m - 1)) * np.sum(np.exp(-abs(t) * ups.imag)))


def random_sector_points(rng, m, delta, count, rmin, rmax):
    """Uniform-in-(log radius, angle) samples of Xi_delta with rmin <= |z| <= rmax."""
    out = []
    half = math.pi / m
    while len(out) < count:
        r = math.exp(rng.uniform(math.log(rmin), math.log(rmax)))
        a = rng.uniform(0.0, 2.0 * half)
        z = cmath.rect(r, a)
        if xi_membership(z, SectorParams(m, delta)):
            out.append(z)
    return np.array(out)
