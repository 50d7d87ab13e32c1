"""Spectral multipliers alpha(Q), cluster projections and resolvent kernels,
plus the localized / dyadic / nonlocal splitting of m_z(tau) = 1/(tau**m - z**m).

The splitting writes m_z through its time representation

    m_z(tau) = (i / (m z**(m-1))) sum_{k<m/2} w_k int exp(i|t|tau_k + i t tau) dt

and inserts cutoffs in t: rho(t) gives the localized part, the dyadic
pieces cut rho further with beta(2**-j |z| t), and the remainder
r_z = m_z - m_z^loc is computed independently from (1 - rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import zeta as hurwitz_zeta

from . import CutoffProximity, LabError, SpectralCollision
from .quad import integrate
from .region import SectorParams, power, xi_membership
from .residue import poles, roots_of_unity

# ---------------------------------------------------------------- containers


@dataclass
class Multiplier:
    evaluator: Callable
    label: str = ""
    a_sup: float | None = None

    def __call__(self, tau):
        return np.asarray(self.evaluator(np.asarray(tau, dtype=float)))

    def sup_weight(self, m, tau_grid):
        """A = sup (1 + tau**m)|alpha(tau)| over the grid (cached)."""
        tau = np.asarray(tau_grid, dtype=float)
        self.a_sup = float(np.max((1 + tau**m) * np.abs(self(tau))))
        return self.a_sup

    @classmethod
    def resolvent(cls, z, m):
        zm = power(z, m)
        return cls(lambda tau: 1.0 / (tau**m - zm), f"m_z z={complex(z)}")

    @classmethod
    def indicator(cls, a, b):
        return cls(lambda tau: ((tau >= a) & (tau < b)).astype(float), f"1[{a},{b})")


@dataclass
class GridFunction:
    values: np.ndarray
    model: object = field(repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.size != self.model.require_basis().size:
            raise LabError("grid function length does not match the model grid")

    def norm(self, p):
        w = self.model.basis.weights
        a = np.abs(self.values)
        if np.isinf(p):
            return float(a.max()) if a.size else 0.0
        return float(np.sum(w * a**p) ** (1.0 / p))


@dataclass
class KernelMatrix:
    """K(x_i, y_j) on the model grid.

    ``reduced`` kernels hold only the row x = x0 (torus origin or sphere
    pole); by translation / rotation invariance that row carries every
    value |K| takes.
    """

    values: np.ndarray
    model: object = field(repr=False)
    reduced: bool = False


# ---------------------------------------------------------------- bumps


def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        y = 1.0 - x
        b = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class BumpFunctions:
    epsilon: float = 0.25

    def __post_init__(self):
        if not 0 < self.epsilon < 0.5:
            raise LabError(f"epsilon must lie in (0, 1/2), got {self.epsilon!r}")

    def rho(self, t):
        """1 on |t| <= eps/2, 0 on |t| >= eps."""
        e = self.epsilon
        return smooth_step((e - np.abs(t)) / (0.5 * e))

    def psi(self, t):
        """1 on |t| <= 1, 0 on |t| >= 2."""
        return smooth_step(2.0 - np.abs(t))

    def beta(self, t):
        return self.psi(t) - self.psi(2.0 * np.asarray(t))

    def rho_tilde(self, t):
        """Low-frequency remainder: rho_tilde + sum_{j>=0} beta(2**-j t) = 1."""
        return self.psi(2.0 * np.asarray(t))


# ---------------------------------------------------------------- spectral ops


def _values_on_spectrum(model, mult):
    return mult(model.mu)


def apply_multiplier(model, mult, f):
    """alpha(Q) f = sum_j alpha(mu_j) <f, e_j> e_j over the retained modes."""
    basis = model.require_basis()
    vals = f.values if isinstance(f, GridFunction) else np.asarray(f)
    return GridFunction(basis.apply(_values_on_spectrum(model, mult), vals), model)


def cluster_projection(model, k, f):
    """chi_k f: projection onto mu_j in [k - 1, k)."""
    if k < 1:
        raise LabError(f"cluster index must be positive, got {k}")
    return apply_multiplier(model, Multiplier.indicator(k - 1, k), f)


def sigma_exponent(p, n):
    """sigma(p) = n(1/2 - 1/p) - 1/2, defined for p >= 2(n+1)/(n-1)."""
    if n < 2:
        raise LabError(f"sigma(p) needs n >= 2, got {n}")
    if p < 2 * (n + 1) / (n - 1) - 1e-12:
        raise LabError(f"p={p} is below the threshold 2(n+1)/(n-1) = {2 * (n + 1) / (n - 1):g}")
    return n * (0.5 - 1.0 / p) - 0.5


def resolvent_values(model, z, window=None):
    """(mu_j**m - z**m)**-1 on the spectrum, zeroed outside ``window`` = [a, b)."""
    zm = power(z, model.m)
    gap = np.abs(model.lam - zm)
    if gap.size and gap.min() < 1e-12:
        raise SpectralCollision(f"z**m = {zm} lies on the retained spectrum")
    vals = 1.0 / (model.lam - zm)
    if window is not None:
        a, b = window
        if b > model.cutoff - 1.0:
            raise CutoffProximity(
                f"window [{a:g}, {b:g}) reaches within 1 of the cutoff {model.cutoff:g}")
        vals = np.where((model.mu >= a) & (model.mu < b), vals, 0.0)
    return vals


def resolvent_kernel(model, z, window=None, *, dense=False):
    """Kernel sum_j (mu_j**m - z**m)**-1 e_j(x) conj(e_j(y)) on the grid."""
    basis = model.require_basis()
    vals = resolvent_values(model, z, window)
    if dense:
        return KernelMatrix(basis.kernel_dense(vals), model, reduced=False)
    return KernelMatrix(basis.kernel_row(vals)[None, :], model, reduced=True)


def mz_bounded_region_bound(z_samples, tau_grid, m):
    """max over samples and grid of (1 + tau**m)|m_z(tau)|."""
    tau = np.asarray(tau_grid, dtype=float)
    best = 0.0
    for z in z_samples:
        vals = (1 + tau**m) / np.abs(tau**m - power(z, m))
        best = max(best, float(vals.max()))
    return best


# ---------------------------------------------------------------- localized parts


def _check_point(z, m):
    z = complex(z)
    if not xi_membership(z, SectorParams(m)):
        raise LabError(f"z={z} is not in the sector for m={m}")
    if abs(z) < 1:
        raise LabError(f"the splitting is used for |z| >= 1, got |z|={abs(z):g}")
    return z


def _prefactor(z, m):
    return 1j / (m * power(z, m - 1))


def _pole_sum(z, m):
    """h(t) = sum_{k<m/2} w_k exp(i t tau_k) for t >= 0, vectorized."""
    ups = poles(z, m).upper
    w = roots_of_unity(m)[: m // 2]

    def h(t):
        t = np.asarray(t, dtype=float)
        return np.tensordot(w, np.exp(1j * np.multiply.outer(ups, t)), axes=1)

    return h


_SPLIT = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def cos_outer(tau, t):
    """cos(tau_i t_j) with the rounding error of the product corrected.

    For tau t in the hundreds the rounded product is off by ~1e-14, which
    would put a noise floor under integrals that cancel to 1e-12; the
    error term of the product is recovered exactly by Veltkamp splitting.
    """
    a = np.asarray(tau, dtype=float)[:, None]
    b = np.asarray(t, dtype=float)[None, :]
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return np.cos(p) - e * np.sin(p)


def _cosine_transform(weight, z, m, tau, lo, hi, tol, breakpoints=(), chunk=32):
    """pref * int_lo^hi weight(t) h(t) 2 cos(t tau) dt for every tau.

    Besides the absolute ``tol`` an interval is accepted at rounding level:
    the integrand's relative sensitivity to its node is about tau*t ulps,
    so the relative floor grows with tau * hi.
    """
    tau = np.atleast_1d(np.asarray(tau, dtype=float))
    pref = _prefactor(z, m)
    h = _pole_sum(z, m)
    out = np.empty(tau.size, dtype=complex)
    err = 0.0
    if hi <= lo:
        return np.zeros(tau.size, dtype=complex), 0.0
    for s in range(0, tau.size, chunk):
        tc = tau[s:s + chunk]

        def f(t, tc=tc):
            base = weight(t) * h(t)
            return 2.0 * base[None, :] * cos_outer(tc, t)

        rel_floor = 1e-15 * (10.0 + float(np.max(np.abs(tc))) * hi)
        res = integrate(f, lo, hi, tol=tol, breakpoints=breakpoints,
                        rel_floor=rel_floor)
        out[s:s + chunk] = pref * res.value
        err = max(err, abs(pref) * res.error)
    return out, err


def _maybe_scalar(x, tau):
    return complex(x[0]) if np.ndim(tau) == 0 else x


def localized_multiplier(tau, z, m, bumps=None, *, tol=1e-12):
    """m_z^loc(tau): the t-integral cut off by rho."""
    bumps = bumps or BumpFunctions()
    z = _check_point(z, m)
    e = bumps.epsilon
    val, _ = _cosine_transform(bumps.rho, z, m, tau, 0.0, e, tol, breakpoints=(e / 2,))
    return _maybe_scalar(val, tau)


def nonlocal_multiplier(tau, z, m, bumps=None, *, tol=1e-12):
    """r_z(tau): the (1 - rho) part, computed without reference to m_z^loc.

    On [eps/2, eps] the weight 1 - rho is integrated numerically; beyond eps
    the half-line integrals are exact: int_eps^inf exp(i t c) dt = i exp(i eps c)/c.
    """
    bumps = bumps or BumpFunctions()
    z = _check_point(z, m)
    e = bumps.epsilon
    mid, _ = _cosine_transform(lambda t: 1.0 - bumps.rho(t), z, m, tau, e / 2, e, tol)
    tau_arr = np.atleast_1d(np.asarray(tau, dtype=float))
    ups = poles(z, m).upper
    w = roots_of_unity(m)[: m // 2]
    cp = ups[None, :] + tau_arr[:, None]
    cm = ups[None, :] - tau_arr[:, None]
    tail = (1j * np.exp(1j * e * cp) / cp + 1j * np.exp(1j * e * cm) / cm) @ w
    val = mid + _prefactor(z, m) * tail
    return _maybe_scalar(val, tau)


def dyadic_piece(tau, z, m, j, bumps=None, *, tol=1e-12):
    """S_{z,j}(tau): rho(t) beta(2**-j |z| t) inserted in the t-integral."""
    bumps = bumps or BumpFunctions()
    z = _check_point(z, m)
    if j < 0:
        raise LabError(f"dyadic index must be >= 0, got {j}")
    e = bumps.epsilon
    scale = 2.0 ** (-j) * abs(z)
    lo, hi = 0.5 / scale, min(2.0 / scale, e)
    if lo >= hi:
        # support of beta(scale t) misses [0, eps]; integrate the (zero)
        # integrand anyway so the value is a genuine quadrature output
        lo, hi = 0.0, e
    weight = lambda t: bumps.rho(t) * bumps.beta(scale * t)
    bps = tuple(b for b in (1.0 / scale, e / 2) if lo < b < hi)
    val, _ = _cosine_transform(weight, z, m, tau, lo, hi, tol, breakpoints=bps)
    return _maybe_scalar(val, tau)


def tilde_piece(tau, z, m, bumps=None, *, tol=1e-12):
    """S~_z(tau): rho(t) rho_tilde(|z| t) inserted in the t-integral."""
    bumps = bumps or BumpFunctions()
    z = _check_point(z, m)
    e = bumps.epsilon
    hi = min(1.0 / abs(z), e)
    weight = lambda t: bumps.rho(t) * bumps.rho_tilde(abs(z) * t)
    bps = tuple(b for b in (0.5 / abs(z), e / 2) if 0 < b < hi)
    val, _ = _cosine_transform(weight, z, m, tau, 0.0, hi, tol, breakpoints=bps)
    return _maybe_scalar(val, tau)


def dyadic_depth(z, bumps):
    """Smallest J with 2**J >= |z| eps, past which every S_{z,j} vanishes."""
    return max(0, math.ceil(math.log2(abs(z) * bumps.epsilon)) + 1)


def central_difference(fn, tau, rel_step=1e-4):
    """d/dtau by central differences with h = rel_step (1 + |tau|)."""
    tau = np.asarray(tau, dtype=float)
    h = rel_step * (1 + np.abs(tau))
    return (fn(tau + h) - fn(tau - h)) / (2 * h)


# ---------------------------------------------------------------- series bound


def series_bound(m, z_modulus, a, *, direct_terms=20_000):
    """|z|**(1-m) sum_{l>=1} l**(m-1) / (1 + |l - a|)**(m+1), tail summed exactly.

    Terms up to l0 = ceil(a) + direct_terms are summed directly; beyond l0
    put u = 1 + l - a, expand l**(m-1) = (u + a - 1)**(m-1) binomially and
    sum each power of u with the Hurwitz zeta function.
    """
    if z_modulus < 1 or not 0 <= a <= z_modulus:
        raise LabError("series bound needs |z| >= 1 and 0 <= a <= |z|")
    l0 = int(math.ceil(a)) + direct_terms
    ls = np.arange(1, l0 + 1, dtype=float)
    head = np.sum(ls ** (m - 1) / (1 + np.abs(ls - a)) ** (m + 1))
    b = a - 1.0
    u0 = 1.0 + (l0 + 1) - a
    tail = 0.0
    for jj in range(m):
        tail += math.comb(m - 1, jj) * b ** (m - 1 - jj) * float(hurwitz_zeta(m + 1 - jj, u0))
    return float(abs(z_modulus) ** (1 - m) * (head + tail))


def series_bound_probe(m, z_modulus_grid, a_fractions=(0.0, 0.5, 1.0)):
    """Sup of the series over a = frac*|z| for each |z|; returns (per-|z| sups, overall sup)."""
    sups = []
    for r in z_modulus_grid:
        sups.append(max(series_bound(m, r, f * r) for f in a_fractions))
    return sups, max(sups)
