"""Cospheres of convex symbols and the oscillatory integrals over them.

A ConvexSymbol a(xi) is positive and 1-homogeneous; its cosphere is
Sigma = {a = 1}.  Sigma is sampled by the radial map w -> w / a(w) from the
unit sphere, under which the surface measure is |grad a(w)| a(w)**-n dw.
Level sets {a = E} are dilates E * Sigma, so one angular rule serves every
E in the coarea splitting of the weighted resolvent integral

    I(x) = int h(xi) exp(i x.xi) / (a(xi) - w) dxi
         = int_0^inf dE / (E - w) * E**(n-1) int h(E w/a) exp(i E x.w/a) a**-n dw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as spi
from scipy import optimize

from . import LabError, QuadratureError
from .quad import integrate
from .spectra import check_homogeneous


# ---------------------------------------------------------------- symbols


@dataclass
class ConvexSymbol:
    n: int
    a: Callable
    grad: Callable | None = None
    hess: Callable | None = None
    name: str = "symbol"

    def __call__(self, xi):
        return np.asarray(self.a(np.asarray(xi, dtype=float)), dtype=float)

    def gradient(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if self.grad is not None:
            return np.asarray(self.grad(xi))
        h = 1e-5 * np.linalg.norm(xi, axis=1, keepdims=True)
        out = np.empty_like(xi)
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = 1.0
            out[:, i] = (self(xi + h * e) - self(xi - h * e)) / (2 * h[:, 0])
        return out

    def hessian(self, xi):
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        if self.hess is not None:
            return np.asarray(self.hess(xi))
        h = 1e-5 * np.linalg.norm(xi, axis=1, keepdims=True)
        out = np.empty((xi.shape[0], self.n, self.n))
        for i in range(self.n):
            e = np.zeros(self.n)
            e[i] = 1.0
            out[:, :, i] = (self.gradient(xi + h * e) - self.gradient(xi - h * e)) / (2 * h)
        return 0.5 * (out + np.transpose(out, (0, 2, 1)))

    def validate(self, samples=100, seed=0):
        """Homogeneity and Euler relation <xi, grad a> = a on random points."""
        rng = np.random.default_rng(seed)
        check_homogeneous(self, self.n, rng, samples)
        xi = rng.standard_normal((samples, self.n))
        euler = np.einsum("ij,ij->i", xi, self.gradient(xi))
        a = self(xi)
        if np.max(np.abs(euler - a) / a) >= 1e-7:
            raise LabError(f"{self.name}: Euler relation fails")


def euclid(n):
    def a(x):
        return np.linalg.norm(x, axis=-1)

    def g(x):
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    def H(x):
        r = np.linalg.norm(x, axis=-1)[:, None, None]
        u = x[:, :, None] * x[:, None, :]
        return (np.eye(x.shape[1])[None] - u / r**2) / r

    return ConvexSymbol(n, a, g, H, "euclid")


def ellipse(coeffs):
    """a(xi) = sqrt(sum c_i xi_i**2)."""
    c = np.asarray(coeffs, dtype=float)
    if np.any(c <= 0):
        raise LabError("ellipse coefficients must be positive")

    def a(x):
        return np.sqrt(np.sum(c * np.asarray(x) ** 2, axis=-1))

    def g(x):
        return c * x / a(x)[:, None]

    def H(x):
        av = a(x)[:, None, None]
        cx = c * x
        return (np.diag(c)[None] - cx[:, :, None] * cx[:, None, :] / av**2) / av

    return ConvexSymbol(c.size, a, g, H, f"ellipse{tuple(c)}")


def lp4(n):
    """(sum xi_i**4)**(1/4): convex but flat at the coordinate axes."""
    def a(x):
        return np.sum(np.asarray(x) ** 4, axis=-1) ** 0.25

    def g(x):
        S = np.sum(x**4, axis=-1)[:, None]
        return x**3 * S ** (-0.75)

    def H(x):
        S = np.sum(x**4, axis=-1)[:, None, None]
        x3 = x**3
        d = 3 * x**2 * S[:, :, 0] ** (-0.75)
        return (np.einsum("ij,jk->ijk", d, np.eye(x.shape[1]))
                - 3 * x3[:, :, None] * x3[:, None, :] * S ** (-1.75))

    return ConvexSymbol(n, a, g, H, "lp4")


def parse_symbol(text, n):
    text = text.strip()
    if text == "euclid":
        return euclid(n)
    if text == "lp4":
        return lp4(n)
    if text.startswith("ellipse:"):
        c = [float(v) for v in text.split(":", 1)[1].split(",")]
        if len(c) != n:
            raise LabError(f"ellipse needs {n} coefficients, got {len(c)}")
        return ellipse(c)
    raise LabError(f"unknown symbol {text!r}")


# ---------------------------------------------------------------- surfaces


def sphere_nodes(n, order):
    """Unit-sphere rule: trapezoid in angle (n = 2); Gauss-Legendre in cos(theta)
    times trapezoid in phi (n = 3)."""
    if n == 2:
        th = 2 * np.pi * (np.arange(order) + 0.5) / order
        return np.stack([np.cos(th), np.sin(th)], axis=1), np.full(order, 2 * np.pi / order)
    if n == 3:
        u, gw = np.polynomial.legendre.leggauss(order)
        nph = 2 * order
        ph = 2 * np.pi * (np.arange(nph) + 0.5) / nph
        s = np.sqrt(1 - u**2)
        pts = np.stack([np.outer(s, np.cos(ph)).ravel(), np.outer(s, np.sin(ph)).ravel(),
                        np.repeat(u, nph)], axis=1)
        return pts, np.repeat(gw, nph) * (2 * np.pi / nph)
    raise LabError(f"surface quadrature implemented for n in {{2, 3}}, got {n}")


@dataclass(frozen=True)
class SurfaceQuadrature:
    """Points on Sigma = {a = 1} with surface-measure weights."""

    points: np.ndarray
    weights: np.ndarray
    directions: np.ndarray
    dir_weights: np.ndarray
    order: int

    @classmethod
    def build(cls, sym, order):
        w, dw = sphere_nodes(sym.n, order)
        av = sym(w)
        gnorm = np.linalg.norm(sym.gradient(w), axis=1)
        return cls(w / av[:, None], dw * gnorm * av ** (-sym.n), w, dw, order)

    @property
    def total(self):
        return float(self.weights.sum())


def gaussian_curvature(sym, xi):
    """Curvature of {a = 1} at xi: -det([[H, g], [g^T, 0]]) / |g|**(n+1)."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if np.max(np.abs(sym(xi) - 1.0)) > 1e-8:
        raise LabError("curvature points must lie on a(xi) = 1")
    g = sym.gradient(xi)
    gn = np.linalg.norm(g, axis=1)
    if np.any(gn < 1e-10):
        raise LabError("degenerate gradient on the cosphere")
    H = sym.hessian(xi)
    n = sym.n
    B = np.zeros((xi.shape[0], n + 1, n + 1))
    B[:, :n, :n] = H
    B[:, :n, n] = g
    B[:, n, :n] = g
    return -np.linalg.det(B) / gn ** (n + 1)


def cosphere_samples(sym, count):
    """Deterministic points on Sigma, including the coordinate axes."""
    n = sym.n
    if n == 2:
        th = 2 * np.pi * np.arange(count) / count
        w = np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        k = np.arange(count) + 0.5
        u = 1 - 2 * k / count
        ph = np.pi * (1 + 5**0.5) * k
        s = np.sqrt(1 - u**2)
        w = np.stack([s * np.cos(ph), s * np.sin(ph), u], axis=1)
    w = np.vstack([w, np.eye(n), -np.eye(n)])
    return w / sym(w)[:, None]


def strict_convexity_check(sym, samples=1000, tol=1e-6):
    K = gaussian_curvature(sym, cosphere_samples(sym, samples))
    kmin = float(K.min())
    return {"min_curvature": kmin, "strictly_convex": kmin > tol}


# ---------------------------------------------------------------- surface measure FT


def _radial_extent(sym):
    pts = cosphere_samples(sym, 256)
    return float(np.linalg.norm(pts, axis=1).max())


def _ft_at(sym, x, order, weight=None):
    sq = SurfaceQuadrature.build(sym, order)
    phase = np.exp(1j * sq.points @ np.asarray(x, dtype=float))
    wts = sq.weights if weight is None else sq.weights * weight(sq.points)
    return complex(np.sum(wts * phase)) / (2 * np.pi) ** sym.n


def surface_measure_ft(sym, x, refinement=1, weight=None, rtol=1e-6):
    """(2pi)**-n int_Sigma exp(i x.xi) dS with a doubling error estimate."""
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r > 1e3:
        raise LabError(f"|x| must be at most 1e3, got {r:g}")
    ext = _radial_extent(sym)
    if sym.n == 2:
        order = int(refinement * (1.3 * r * ext + 48))
    else:
        order = int(refinement * (0.7 * r * ext + 24))
    coarse = _ft_at(sym, x, order, weight)
    fine = _ft_at(sym, x, 2 * order, weight)
    err = abs(fine - coarse)
    if err > rtol * max(1.0, abs(fine)):
        raise QuadratureError(f"surface integral not converged at |x|={r:g}", err)
    return fine, err


def decay_exponent_fit(sym, direction, radii, windows=10, per_window=24):
    """Log-log slope of windowed maxima of |FT| along a ray.

    ``radii`` = (r_min, r_max); each of ``windows`` log-spaced windows is
    scanned over one oscillation period (2 pi / extent) for its peak.
    """
    r0, r1 = radii
    if r1 / r0 < 10**1.5 - 1e-9:
        raise LabError("radii must span at least 1.5 decades")
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    ext = _radial_extent(sym)
    period = 2 * np.pi / ext
    starts = np.geomspace(r0, r1 - period, windows)
    peaks, where = [], []
    for s in starts:
        rs = s + period * np.arange(per_window) / per_window
        vals = [abs(surface_measure_ft(sym, r * d, rtol=1e-4)[0]) for r in rs]
        i = int(np.argmax(vals))
        peaks.append(vals[i])
        where.append(rs[i])
    slope = float(np.polyfit(np.log(where), np.log(peaks), 1)[0])
    return slope, np.array(where), np.array(peaks)


# ---------------------------------------------------------------- Bessel oracle


def bessel_j0_series(r, digits=40):
    """J0(r) from its power series in extended precision."""
    import mpmath

    with mpmath.workdps(digits + int(0.5 * abs(r)) + 10):
        x = mpmath.mpf(r) / 2
        term = mpmath.mpf(1)
        total = term
        k = 0
        while True:
            k += 1
            term *= -(x * x) / (k * k)
            total += term
            if abs(term) < mpmath.mpf(10) ** (-(digits + 5)) and k > x:
                break
        return float(total)


# ---------------------------------------------------------------- Heaviside identity


def heaviside_transform(alpha, t):
    """(1/2pi) int exp(-i tau t) / (alpha - i tau) dtau by QUADPACK.

    Real part of the integrand, symmetrized in tau:
    2 int_0^inf [alpha cos(|t| tau) + sgn(t) tau sin(|t| tau)] / (alpha**2 + tau**2) dtau.
    """
    a = float(alpha)
    s = abs(float(t))
    if s == 0:
        raise LabError("the transform is discontinuous at t = 0")
    c = spi.quad(lambda u: a / (a * a + u * u), 0, np.inf, weight="cos", wvar=s)[0]
    sn = spi.quad(lambda u: u / (a * a + u * u), 0, np.inf, weight="sin", wvar=s)[0]
    return 2 * (c + math.copysign(1.0, t) * sn) / (2 * np.pi)


def heaviside_closed_form(alpha, t):
    """sgn(alpha) H(alpha t) exp(-alpha t)."""
    if alpha * t > 0:
        return math.copysign(1.0, alpha) * math.exp(-alpha * t)
    return 0.0


# ---------------------------------------------------------------- coarea


def coarea_volume(sym, order=256):
    """vol{a <= 1} = int_0^1 dE int_{a = E} dS_E / |grad a| (level sets E * Sigma)."""
    sq = SurfaceQuadrature.build(sym, order)
    gn = np.linalg.norm(sym.gradient(sq.points), axis=1)
    surface = float(np.sum(sq.weights / gn))  # E = 1 level set
    return integrate(lambda E: surface * E ** (sym.n - 1) * np.ones_like(E), 0.0, 1.0).value


def direct_volume_2d(sym):
    """Area of {a <= 1} as an iterated Cartesian integral with root-found limits."""
    if sym.n != 2:
        raise LabError("direct volume implemented for n = 2")
    x1max = 1.0 / float(sym(np.array([[1.0, 0.0]]))[0])

    def height(x1):
        f = lambda y: float(sym(np.array([[x1, y]]))[0]) - 1.0
        if f(0.0) >= 0:
            return 0.0
        hi = 1.0
        while f(hi) < 0:
            hi *= 2
        return optimize.brentq(f, 0.0, hi, xtol=1e-15)

    val = spi.quad(height, -x1max, x1max, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
    return 2.0 * val


# ---------------------------------------------------------------- normal map


def normal_points(sym, direction, samples=2000):
    """Points on the planar cosphere whose outward normal is parallel to +-direction.

    Roots of the cross product of the normal with the direction are
    bracketed on a sampled angle grid and polished by brentq.
    """
    if sym.n != 2:
        raise LabError("normal map implemented for n = 2")
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)

    def point(th):
        w = np.array([[math.cos(th), math.sin(th)]])
        return w / sym(w)[:, None]

    def cross(th):
        g = sym.gradient(point(th))[0]
        g = g / np.linalg.norm(g)
        return g[0] * d[1] - g[1] * d[0]

    th = 2 * np.pi * np.arange(samples + 1) / samples
    c = np.array([cross(t) for t in th])
    found = []
    for i in range(samples):
        if c[i] == 0 or c[i] * c[i + 1] < 0:
            root = th[i] if c[i] == 0 else optimize.brentq(cross, th[i], th[i + 1], xtol=1e-14)
            p = point(root)[0]
            g = sym.gradient(p[None])[0]
            g = g / np.linalg.norm(g)
            ang = math.acos(min(1.0, abs(float(g @ d))))
            if ang < 1e-3:
                found.append(p)
    return np.array(found)


# ---------------------------------------------------------------- weighted resolvent integral


def mihlin_check(h, n, samples=50, seed=0, step=1e-4):
    """Max over random xi of |xi|**|k| |d^k h(xi)| for |k| <= 2 (finite differences)."""
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal((samples, n)) * np.exp(rng.uniform(-3, 3, (samples, 1)))
    worst = float(np.max(np.abs(h(xi))))
    r = np.linalg.norm(xi, axis=1, keepdims=True)
    eps = step * r
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        d1 = (h(xi + eps * e) - h(xi - eps * e)) / (2 * eps[:, 0])
        d2 = (h(xi + eps * e) - 2 * h(xi) + h(xi - eps * e)) / eps[:, 0] ** 2
        worst = max(worst, float(np.max(np.abs(d1) * r[:, 0])),
                    float(np.max(np.abs(d2) * r[:, 0] ** 2)))
    return worst


def _level_set_transform(sym, h, x, order):
    """E -> J(E, x) = E**(n-1) int h(E w/a) exp(i E x.w/a) a**-n dw, vectorized in E."""
    w, dw = sphere_nodes(sym.n, order)
    av = sym(w)
    base = dw * av ** (-sym.n)
    pts = w / av[:, None]
    proj = pts @ np.asarray(x, dtype=float)
    n = sym.n

    def J(E):
        E = np.atleast_1d(np.asarray(E, dtype=float))
        ph = np.exp(1j * np.multiply.outer(E, proj))
        if h is None:
            vals = ph @ base
        else:
            hv = h(np.einsum("e,pn->epn", E, pts).reshape(-1, n)).reshape(E.size, -1)
            vals = (hv * ph) @ base
        return E ** (n - 1) * vals

    return J


def weighted_resolvent_integral(sym, x, w, h=None, *, order=None, radius=None,
                                tol=1e-9, max_doublings=6, return_parts=False):
    """I(x) = int h(xi) exp(i x.xi) / (a(xi) - w) dxi via level sets of a.

    The E-integral carries a smooth cutoff chi(E/R) (1 up to R, 0 past 2R);
    R is doubled until two successive values agree to 1e-5 relative.  Near E = Re w the
    kernel 1/(E - w) is split into an odd principal part and an even
    Lorentzian part, both regular enough for Gauss rules on graded panels.
    ``h`` None means h = 1.
    """
    w = complex(w)
    if w.imag == 0 and w.real >= 0:
        raise LabError(f"w={w} lies on [0, inf)")
    x = np.asarray(x, dtype=float)
    r = float(np.linalg.norm(x))
    if r == 0:
        raise LabError("x must be nonzero")
    ext = _radial_extent(sym)
    if radius is None:
        radius = max(8.0, 160.0 / r, 2.0 * abs(w))
    value = _resolvent_integral_once(sym, x, w, h, order, radius, tol, ext, r)
    for _ in range(max_doublings):
        radius *= 2
        if order is not None:
            order *= 2
        check = _resolvent_integral_once(sym, x, w, h, order, radius, tol, ext, r)
        tail = abs(check - value)
        value = check
        if tail <= 1e-5 * abs(check):
            break
    else:
        raise QuadratureError(f"radial truncation not converged at |x|={r:g}, w={w}", tail)
    if return_parts:
        return value, tail
    return value


def _resolvent_integral_once(sym, x, w, h, order, R, tol, ext, r):
    if order is None:
        order = int(1.3 * 2 * R * r * ext + 64) if sym.n == 2 else int(0.7 * 2 * R * r * ext + 24)
    J = _level_set_transform(sym, h, x, order)
    cut = lambda E: 1.0 - _step((E - R) / R)
    scale = float(np.max(np.abs(J(np.linspace(0.0, 2 * R, 64))))) or 1.0
    atol = tol * scale
    w1, w2 = w.real, w.imag
    top = 2.0 * R
    if w1 <= 0:
        f = lambda E: cut(E) * J(E) / (E - w)
        bps = tuple(b for b in (R,) if b < top)
        return complex(integrate(f, 0.0, top, tol=atol, breakpoints=bps, order=24).value)
    d = min(w1, 0.5 * (top - w1), max(abs(w2), 0.25))
    d = min(d, w1)
    F = lambda E: cut(E) * J(E)
    total = 0.0 + 0.0j
    if w1 - d > 0:
        total += integrate(lambda E: F(E) / (E - w), 0.0, w1 - d, tol=atol, order=24).value
    if w1 + d < top:
        bps = tuple(b for b in (R,) if w1 + d < b < top)
        total += integrate(lambda E: F(E) / (E - w), w1 + d, top, tol=atol, order=24,
                           breakpoints=bps).value
    # symmetric piece around w1:  int_0^d [s (F(w1+s) - F(w1-s)) + i w2 (F(w1+s) + F(w1-s))] / (s^2 + w2^2) ds
    def sym_part(s):
        s = np.asarray(s, dtype=float)
        fp, fm = F(w1 + s), F(w1 - s)
        return (s * (fp - fm) + 1j * w2 * (fp + fm)) / (s * s + w2 * w2)

    panels = [0.0]
    b = max(abs(w2), 1e-12)
    while b < d:
        panels.append(b)
        b *= 4.0
    panels.append(d)
    total += integrate(sym_part, 0.0, d, tol=atol, order=24,
                       breakpoints=tuple(panels[1:-1])).value
    return complex(total)


def _step(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
        y = 1.0 - x
        b = np.where(y > 0, np.exp(-1.0 / np.where(y > 0, y, 1.0)), 0.0)
    return a / (a + b)


def lemma_bound(x, w, n):
    r = float(np.linalg.norm(x))
    return r ** (1 - n) + (abs(w) / r) ** ((n - 1) / 2)


def bound_ratio(sym, probes, h=None, *, order_scale=1.0):
    """max over (x, w) probes of |I(x)| / (|x|**(1-n) + (|w|/|x|)**((n-1)/2))."""
    ratios = []
    for x, w in probes:
        r = float(np.linalg.norm(x))
        R = max(8.0, 160.0 / r, 2.0 * abs(w))
        base = int(1.3 * 2 * R * r * _radial_extent(sym) + 64)
        val = weighted_resolvent_integral(sym, x, w, h, order=int(order_scale * base), radius=R)
        ratios.append(abs(val) / lemma_bound(x, w, sym.n))
    return float(max(ratios)), np.array(ratios)


def circle_resolvent_oracle(r):
    """int_{R^2} exp(i x.xi) / (|xi| + 1) dxi = 2 pi [1/r - (pi/2)(H0(r) - Y0(r))]."""
    from scipy.special import struve, y0

    return 2 * np.pi * (1.0 / r - 0.5 * np.pi * (struve(0, r) - y0(r)))


def gradient_constant(sym, samples=4096):
    """A with |grad a| >= 1/A on the unit sphere (degree-0 homogeneity extends it)."""
    w, _ = sphere_nodes(sym.n, samples if sym.n == 2 else int(np.sqrt(samples)))
    w = np.vstack([w, np.eye(sym.n), -np.eye(sym.n)])
    gmin = float(np.linalg.norm(sym.gradient(w), axis=1).min())
    if gmin < 1e-10:
        raise LabError("degenerate gradient on the unit sphere")
    return 1.0 / gmin
