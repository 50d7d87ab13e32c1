"""Vectorized adaptive Gauss-Legendre quadrature.

The integrand is evaluated on many nodes at once and may return a batch of
values per node (shape ``(..., len(t))``), so a whole grid of parameters
(e.g. every tau of a multiplier sweep) shares one subdivision.  Sharing the
subdivision makes the rule a fixed linear functional across the batch,
which keeps finite differences of quadrature output smooth.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import QuadratureError


@dataclass(frozen=True)
class QuadResult:
    value: np.ndarray | complex
    error: float
    intervals: int


@lru_cache(maxsize=8)
def _gauss(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _rule(f, a, b, order, with_abs=False):
    """Apply the order-point Gauss rule on every interval [a_i, b_i] at once."""
    x, w = _gauss(order)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    vals = np.asarray(f(nodes))
    vals = vals.reshape(vals.shape[:-1] + (a.size, order))
    value = (vals * w).sum(axis=-1) * half
    if with_abs:
        return value, (np.abs(vals) * w).sum(axis=-1) * half
    return value


def integrate(f, a, b, *, tol=1e-10, order=16, max_level=48, breakpoints=(),
              max_intervals=50_000, rel_floor=0.0):
    """Integrate ``f`` over [a, b] to absolute tolerance ``tol``.

    Each interval is estimated with one Gauss rule on the whole interval and
    one on its two halves; the halves are accepted when the two estimates
    agree to a share of ``tol`` proportional to the interval length.  Raises
    QuadratureError (with the achieved error attached) if the subdivision
    limit is exhausted.

    ``rel_floor`` > 0 also accepts an interval once the discrepancy is below
    that multiple of the interval's integral of |f|, which lets ``tol = 0``
    mean "as accurate as rounding allows" for integrands with cancellation.
    """
    if b < a:
        res = integrate(f, b, a, tol=tol, order=order, max_level=max_level,
                        breakpoints=breakpoints, max_intervals=max_intervals,
                        rel_floor=rel_floor)
        return QuadResult(-res.value, res.error, res.intervals)
    if b == a:
        probe = np.asarray(f(np.array([a])))
        return QuadResult(np.zeros(probe.shape[:-1], dtype=probe.dtype)[()], 0.0, 0)

    edges = np.unique(np.concatenate(([a], [p for p in breakpoints if a < p < b], [b])))
    lo, hi = edges[:-1], edges[1:]
    length = b - a
    total = None
    err_total = 0.0
    n_done = 0
    for _ in range(max_level):
        mid = 0.5 * (lo + hi)
        whole = _rule(f, lo, hi, order)
        halves, absval = _rule(f, np.concatenate((lo, mid)), np.concatenate((mid, hi)),
                               order, with_abs=True)
        k = lo.size
        halves = halves[..., :k] + halves[..., k:]
        absval = absval[..., :k] + absval[..., k:]
        diff = np.abs(whole - halves)
        if not np.all(np.isfinite(diff)):
            raise QuadratureError(f"integrand is not finite on [{a:g}, {b:g}]", float("nan"))
        allowed = np.maximum(tol * (hi - lo) / length, rel_floor * absval)
        excess = (diff - allowed).reshape(-1, k).max(axis=0)
        err = diff.reshape(-1, k).max(axis=0)
        ok = excess <= 0
        if total is None:
            total = np.zeros(halves.shape[:-1], dtype=halves.dtype)
        if ok.any():
            total = total + halves[..., ok].sum(axis=-1)
            err_total += float(err[ok].sum())
            n_done += int(ok.sum())
        lo, hi, mid = lo[~ok], hi[~ok], mid[~ok]
        if lo.size == 0:
            return QuadResult(total[()], err_total, n_done)
        if 2 * lo.size + n_done > max_intervals:
            break
        lo, hi = np.concatenate((lo, mid)), np.concatenate((mid, hi))
    achieved = err_total + float(err[~ok].sum())
    raise QuadratureError(
        f"adaptive quadrature did not reach tol={tol:g} on [{a:g}, {b:g}]", achieved)
