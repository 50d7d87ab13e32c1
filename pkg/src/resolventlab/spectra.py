"""Model spectra for Q = P**(1/m).

Two explicit realizations are provided:

* the flat torus T^n = (R/2piZ)^n, where Q has a homogeneous symbol q and
  eigenfunctions (2pi)**(-n/2) exp(i k.x), sampled on a uniform grid fine
  enough that the trapezoid rule is exact for every retained product;
* a Zoll-type clustered spectrum, mu = k + (n-1)/2 with the multiplicities
  of degree-k spherical harmonics on S^n, optionally jittered inside
  intervals of width C/k.  For n in {2, 3} the zonal eigenfunctions can be
  attached on a theta-grid.

Custom spectra can be read from a two-column CSV.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import eval_chebyu, eval_legendre, gammaln

from . import CutoffProximity, LabError
from .region import _check_order

MAX_MODES = 10_000_000


# ---------------------------------------------------------------- bases


class TorusBasis:
    """Fourier modes on a uniform N**n grid of the torus, applied by FFT."""

    def __init__(self, n, lattice, N):
        self.n = n
        self.N = int(N)
        self.lattice = lattice
        self.shape = (self.N,) * n
        self.size = self.N**n
        self.cell = (2 * math.pi / self.N) ** n
        self.weights = np.full(self.size, self.cell)
        self._index = tuple(np.mod(lattice[:, i], self.N) for i in range(n))

    def coords(self):
        ax = 2 * math.pi * np.arange(self.N) / self.N
        mesh = np.meshgrid(*([ax] * self.n), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def spectral_grid(self, values):
        """Place per-mode values on the FFT frequency grid (zero elsewhere)."""
        out = np.zeros(self.shape, dtype=np.result_type(values, float))
        out[self._index] = values
        return out

    def apply(self, values, f):
        F = np.fft.fftn(np.asarray(f).reshape(self.shape))
        return np.fft.ifftn(F * self.spectral_grid(values)).ravel()

    def coefficients(self, f):
        """<f, e_k> for every retained mode."""
        F = np.fft.fftn(np.asarray(f).reshape(self.shape))
        return F[self._index] * self.cell / (2 * math.pi) ** (self.n / 2)

    def eigenfunctions(self, idx):
        x = self.coords()
        k = self.lattice[np.atleast_1d(idx)]
        return np.exp(1j * k @ x.T) / (2 * math.pi) ** (self.n / 2)

    def trace(self, idx, model, chunk=256):
        total = 0.0
        for start in range(0, idx.size, chunk):
            E = self.eigenfunctions(idx[start:start + chunk])
            total += float(np.sum(np.abs(E) ** 2 * self.weights))
        return total

    def diagonal(self, values):
        """sum_j values_j |e_j(x)|**2 at every grid point."""
        return np.full(self.size, np.sum(values) / (2 * math.pi) ** self.n)

    def kernel_row(self, values):
        """K(x0, y) for x0 = 0; the kernel is translation invariant."""
        # K(0, y) = (2pi)^-n sum_k a_k exp(-i k.y)
        G = self.spectral_grid(values)
        row = np.fft.fftn(G) / (2 * math.pi) ** self.n
        return row.ravel()

    def kernel_dense(self, values):
        if self.size > 4096:
            raise LabError(f"dense torus kernel limited to 4096 grid points, got {self.size}")
        G = self.spectral_grid(values)
        conv = np.fft.ifftn(G) * self.size / (2 * math.pi) ** self.n  # K(d) = K(x - y)
        idx = np.array(np.unravel_index(np.arange(self.size), self.shape)).T
        diff = (idx[:, None, :] - idx[None, :, :]) % self.N
        return conv[tuple(diff[..., i] for i in range(self.n))]


class ZonalBasis:
    """Zonal eigenfunctions (one per cluster) on S^2 or S^3 along a theta-grid.

    Zonal functions form an invariant subspace, so operator norms computed
    on it are lower bounds for the full ones; at the pole every other
    harmonic vanishes, so |e_k(pole)|**2 = d_k / Vol and kernel rows at the
    pole are exact.
    """

    def __init__(self, n, degrees, nodes):
        if n not in (2, 3):
            raise LabError(f"zonal evaluators exist for n in {{2, 3}}, got n={n}")
        self.n = n
        self.degrees = np.asarray(degrees)
        kmax = int(self.degrees.max())
        if n == 3:
            M = max(int(nodes), 2 * kmax + 4)
            theta = np.pi * np.arange(M + 1) / M
            w = 4 * np.pi * np.sin(theta) ** 2 * (np.pi / M)
            w[[0, -1]] = 0.0
            c = np.cos(theta)
            E = np.array([eval_chebyu(k, c) for k in self.degrees]) / (np.pi * math.sqrt(2))
        else:
            M = max(int(nodes), kmax + 2)
            x, gw = np.polynomial.legendre.leggauss(M)
            c = np.concatenate(([1.0], x[::-1], [-1.0]))
            w = np.concatenate(([0.0], 2 * np.pi * gw[::-1], [0.0]))
            theta = np.arccos(c)
            norm = np.sqrt((2 * self.degrees + 1) / (4 * np.pi))
            E = norm[:, None] * np.array([eval_legendre(k, c) for k in self.degrees])
        self.theta = theta
        self.weights = w
        self.size = theta.size
        self.E = E

    def coords(self):
        return self.theta[:, None]

    def coefficients(self, f):
        return self.E @ (self.weights * np.asarray(f))

    def apply(self, values, f):
        return (np.asarray(values) * self.coefficients(f)) @ self.E

    def eigenfunctions(self, idx):
        return self.E[np.atleast_1d(idx)]

    def trace(self, idx, model):
        # sum over a full harmonic space of |Y(x)|^2 is constant in x and
        # equals |e_k(pole)|^2, so its integral is Vol * |e_k(pole)|^2
        return float(model.volume * np.sum(np.abs(self.E[idx, 0]) ** 2))

    def diagonal(self, values):
        return (np.asarray(values)[:, None] * np.abs(self.E) ** 2).sum(axis=0)

    def kernel_row(self, values):
        return (np.asarray(values) * self.E[:, 0]) @ self.E

    def kernel_dense(self, values):
        return (self.E.T * np.asarray(values)) @ self.E


# ---------------------------------------------------------------- model


@dataclass(frozen=True)
class ModelSpectrum:
    """Eigenvalues of Q with multiplicities, sorted ascending.

    ``mode_ids`` are lattice vectors (torus), degrees (Zoll) or row numbers
    (custom).  ``basis`` carries grid weights and eigenfunction evaluators
    when available; its entries correspond one-to-one with ``mu``.
    """

    n: int
    m: int
    mu: np.ndarray
    mult: np.ndarray
    volume: float
    cutoff: float
    kind: str
    mode_ids: np.ndarray | None = None
    symbol: Callable | None = None
    basis: object | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        _check_order(self.m)
        if self.n < 1:
            raise LabError(f"dimension must be positive, got {self.n}")
        if self.mu.size and np.any(np.diff(self.mu) < 0):
            raise LabError("eigenvalues must be sorted")

    @property
    def lam(self):
        """Eigenvalues of P."""
        return self.mu**self.m

    @property
    def total(self):
        return int(self.mult.sum())

    @property
    def has_eigenfunctions(self):
        return self.basis is not None

    def require_basis(self):
        if self.basis is None:
            raise LabError(f"{self.kind} model was built without eigenfunctions")
        return self.basis

    def check_window(self, alpha, halfwidth=1.0):
        """Raise if [alpha - halfwidth, alpha + halfwidth] comes within 1 of the cutoff."""
        if alpha + halfwidth > self.cutoff - 1.0:
            raise CutoffProximity(
                f"window around alpha={alpha:g} reaches within 1 of the cutoff {self.cutoff:g}")


# ---------------------------------------------------------------- torus


def check_homogeneous(q, n, rng=None, samples=100):
    rng = rng or np.random.default_rng(0)
    xi = rng.standard_normal((samples, n))
    s = rng.uniform(0.1, 10.0, samples)
    lhs = np.asarray(q(s[:, None] * xi), dtype=float)
    rhs = s * np.asarray(q(xi), dtype=float)
    if np.any(rhs <= 0):
        raise LabError("symbol must be positive away from the origin")
    if np.max(np.abs(lhs - rhs)) >= 1e-9 * max(1.0, float(np.max(np.abs(rhs)))):
        raise LabError("symbol is not positively homogeneous of degree one")


def _sphere_min(q, n, rng):
    w = rng.standard_normal((4000, n))
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    axes = np.vstack([np.eye(n), -np.eye(n)])
    return float(np.min(q(np.vstack([w, axes]))))


def build_torus_model(n, q_symbol, cutoff, grid_resolution=None, *, m=2):
    """Modes k in Z^n with q(k) < cutoff; eigenfunctions on an N**n grid.

    ``grid_resolution`` None skips the grid (counting-only model); otherwise
    it is raised to the smallest alias-free size 2*max|k_i| + 1 if needed.
    """
    if n < 1:
        raise LabError(f"dimension must be positive, got {n}")
    if not cutoff > 0:
        raise LabError(f"cutoff must be positive, got {cutoff!r}")
    rng = np.random.default_rng(12345)
    check_homogeneous(q_symbol, n, rng)
    qmin = _sphere_min(q_symbol, n, rng)
    K = int(math.ceil(cutoff / (0.9 * qmin)))
    if (2 * K + 1) ** n > 5 * MAX_MODES:
        raise LabError(f"cutoff {cutoff:g} gives more than {MAX_MODES} modes")
    ax = np.arange(-K, K + 1)
    lattice = np.stack([g.ravel() for g in np.meshgrid(*([ax] * n), indexing="ij")], axis=1)
    vals = np.asarray(q_symbol(lattice.astype(float)), dtype=float)
    vals[np.all(lattice == 0, axis=1)] = 0.0
    keep = vals < cutoff
    if keep.sum() > MAX_MODES:
        raise LabError(f"cutoff {cutoff:g} gives more than {MAX_MODES} modes")
    lattice, vals = lattice[keep], vals[keep]
    order = np.lexsort((*lattice.T[::-1], vals))
    lattice, vals = lattice[order], vals[order]
    basis = None
    if grid_resolution is not None:
        kmax = int(np.abs(lattice).max()) if lattice.size else 0
        N = max(int(grid_resolution), 2 * kmax + 1)
        basis = TorusBasis(n, lattice, N)
    return ModelSpectrum(n=n, m=m, mu=vals, mult=np.ones(vals.size, dtype=int),
                         volume=(2 * math.pi) ** n, cutoff=float(cutoff), kind="torus",
                         mode_ids=lattice, symbol=q_symbol, basis=basis)


# ---------------------------------------------------------------- Zoll


def sphere_harmonic_dimension(k, n):
    """Dimension of degree-k spherical harmonics on S^n."""
    k = int(k)
    if k == 0:
        return 1
    return (2 * k + n - 1) * math.factorial(k + n - 2) // (math.factorial(k) * math.factorial(n - 1))


def sphere_volume(n):
    """Surface measure of the unit sphere S^n in R^(n+1)."""
    return float(2 * math.pi ** ((n + 1) / 2) / math.exp(gammaln((n + 1) / 2)))


def cluster_center(k, n, T=2 * math.pi, alpha_shift=None):
    alpha_shift = 2.0 * (n - 1) if alpha_shift is None else alpha_shift
    return (2 * math.pi / T) * (k + alpha_shift / 4.0)


def build_zoll_model(n, K, *, T=2 * math.pi, alpha_shift=None, jitter=0.0, m=2,
                     seed=0, eigenfunctions=False, nodes=0):
    """Clusters k = 0..K at c_k = (2pi/T)(k + alpha_shift/4) with d_k harmonics each.

    The default shift 2(n-1) gives the sphere's c_k = k + (n-1)/2.  With
    jitter C > 0 cluster k >= 1 is moved to c_k + u C/k, u uniform in [-1, 1]
    from a seeded generator.
    """
    if n < 2:
        raise LabError(f"Zoll model needs n >= 2, got {n}")
    if K < 2:
        raise LabError(f"Zoll model needs K >= 2, got {K}")
    if not jitter >= 0:
        raise LabError(f"jitter C must be nonnegative, got {jitter!r}")
    if alpha_shift is None:
        alpha_shift = 2.0 * (n - 1)
    ks = np.arange(K + 1)
    centers = (2 * math.pi / T) * (ks + alpha_shift / 4.0)
    u = np.random.default_rng(seed).uniform(-1.0, 1.0, K + 1)
    u[0] = 0.0
    shifts = np.zeros(K + 1)
    shifts[1:] = u[1:] * jitter / ks[1:]
    mu = centers + shifts
    if np.any(mu <= 0) or np.any(np.diff(mu) <= 0):
        raise LabError("jitter too large: clusters overlap or leave (0, inf)")
    mult = np.array([sphere_harmonic_dimension(k, n) for k in ks])
    basis = ZonalBasis(n, ks, nodes) if eigenfunctions else None
    step = 2 * math.pi / T
    return ModelSpectrum(n=n, m=m, mu=mu, mult=mult, volume=sphere_volume(n),
                         cutoff=float(centers[-1] + 0.5 * step), kind="zoll",
                         mode_ids=ks, basis=basis,
                         params={"T": T, "alpha_shift": alpha_shift, "jitter": jitter, "seed": seed})


# ---------------------------------------------------------------- custom


def load_custom_spectrum(path, *, n=3, m=2, volume=1.0):
    """Read a `mu,multiplicity` CSV (header optional) into an eigenfunction-free model."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            if [c.strip().lower() for c in row] == ["mu", "multiplicity"]:
                continue
            if len(row) != 2:
                raise LabError(f"line {lineno}: expected 2 columns, got {len(row)}")
            try:
                mu, mult = float(row[0]), int(row[1])
            except ValueError as exc:
                raise LabError(f"line {lineno}: malformed row {row!r}") from exc
            if not mu > 0:
                raise LabError(f"line {lineno}: non-positive eigenvalue {mu}")
            if mult < 1:
                raise LabError(f"line {lineno}: multiplicity must be positive, got {mult}")
            rows.append((mu, mult))
    if not rows:
        raise LabError("no eigenvalues")
    arr = np.array(rows)
    if np.any(np.diff(arr[:, 0]) < 0):
        warnings.warn("custom spectrum was not sorted; sorting on load", stacklevel=2)
        arr = arr[np.argsort(arr[:, 0], kind="stable")]
    mu = arr[:, 0]
    return ModelSpectrum(n=n, m=m, mu=mu, mult=arr[:, 1].astype(int), volume=volume,
                         cutoff=float(mu[-1]), kind="custom", mode_ids=np.arange(mu.size))


# ---------------------------------------------------------------- analytics


def counting_function(model, alpha):
    """Multiplicity-weighted number of eigenvalues strictly below alpha."""
    return int(model.mult[model.mu < alpha].sum())


def sphere_rule(n, order):
    """Nodes and weights on S^(n-1) for n in {2, 3} (angles exact for trig polys)."""
    if n == 2:
        th = 2 * np.pi * np.arange(order) / order
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(order, 2 * np.pi / order)
    if n == 3:
        x, gw = np.polynomial.legendre.leggauss(order)
        ph = 2 * np.pi * np.arange(2 * order) / (2 * order)
        s = np.sqrt(1 - x**2)
        pts = np.stack([np.outer(s, np.cos(ph)).ravel(), np.outer(s, np.sin(ph)).ravel(),
                        np.repeat(x, ph.size)], axis=1)
        return pts, np.repeat(gw, ph.size) * (np.pi / order)
    raise LabError(f"sphere rules implemented for n in {{2, 3}}, got {n}")


def weyl_constant(model, order=64):
    """(2pi)^-n Vol(M) vol{q <= 1}, with a refinement error estimate.

    vol{q <= 1} = (1/n) int_{S^(n-1)} q(w)**-n dw by polar coordinates.
    """
    if model.symbol is None:
        raise LabError("Weyl constant needs a model with a symbol")
    n = model.n

    def ball(o):
        pts, w = sphere_rule(n, o)
        return float(np.sum(w * np.asarray(model.symbol(pts)) ** (-n)) / n)

    coarse, fine = ball(order), ball(2 * order)
    C = fine * model.volume / (2 * math.pi) ** n
    err = abs(fine - coarse) * model.volume / (2 * math.pi) ** n
    return C, err


def spectral_function_trace(model, alpha):
    """int S_alpha(x, x) dx by grid quadrature of sum_{mu_j < alpha} |e_j(x)|**2."""
    basis = model.require_basis()
    idx = np.nonzero(model.mu < alpha)[0]
    return basis.trace(idx, model)


@dataclass(frozen=True)
class ClusterReport:
    k: int
    center: float
    halfwidth: float
    count: int


def cluster_report(model, T=2 * math.pi, alpha_shift=None, C=0.0, *, kmax=None):
    """Counts d_k in I_k = [c_k - C/k, c_k + C/k], the slope of log d_k vs log k
    over k in [kmax/2, kmax], and the number of eigenvalues between the
    first and last interval that fall in none of them."""
    alpha_shift = 2.0 * (model.n - 1) if alpha_shift is None else alpha_shift
    step = 2 * math.pi / T
    if kmax is None:
        kmax = int(math.floor((model.cutoff - (C + 1e-9)) / step - alpha_shift / 4.0))
    if kmax < 2:
        raise LabError("spectrum too short for a cluster report")
    reports = []
    inside = np.zeros(model.mu.size, dtype=bool)
    tol = 1e-9
    for k in range(1, kmax + 1):
        c = step * (k + alpha_shift / 4.0)
        w = C / k
        sel = np.abs(model.mu - c) <= w + tol * max(1.0, c)
        inside |= sel
        reports.append(ClusterReport(k, c, w, int(model.mult[sel].sum())))
    lo = reports[0].center - reports[0].halfwidth
    hi = reports[-1].center + reports[-1].halfwidth
    span = (model.mu >= lo) & (model.mu <= hi)
    outside = int(model.mult[span & ~inside].sum())
    ks = np.array([r.k for r in reports if r.k >= kmax / 2 and r.count > 0], dtype=float)
    ds = np.array([r.count for r in reports if r.k >= kmax / 2 and r.count > 0], dtype=float)
    slope = float(np.polyfit(np.log(ks), np.log(ds), 1)[0]) if ks.size >= 2 else float("nan")
    return reports, slope, outside


def saturation_density(model, alpha_k, beta_k):
    """(beta alpha**(n-1))**-1 [N(alpha + beta) - N(alpha - beta)]."""
    if not beta_k > 0:
        raise LabError(f"beta must be positive, got {beta_k!r}")
    diff = counting_function(model, alpha_k + beta_k) - counting_function(model, alpha_k - beta_k)
    return diff / (beta_k * alpha_k ** (model.n - 1))
