"""Operator-norm probes on model spectra.

L2 -> L2 norms of spectral multipliers are exact (max |alpha(mu_j)|), and
L1 -> Linf norms are exact on the grid (max |K(x, y)|).  For other (p, q)
only lower bounds are available; they come from a nonlinear power
iteration whose Rayleigh ratio ||Tu||_q / ||u||_p never decreases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import LabError
from .multiplier import (GridFunction, Multiplier, apply_multiplier, resolvent_kernel,
                         resolvent_values, smooth_step)
from .parallel import parallel_map
from .region import power


@dataclass
class NormProbeResult:
    value: float
    kind: str
    iterations: int = 0
    witness: GridFunction | None = None
    converged: bool = True
    history: list | None = None


@dataclass(frozen=True)
class SaturationSequence:
    k: int
    alpha_k: float
    beta_k: float
    z_k: complex
    branch: int
    L_k: float
    density_k: float


# ---------------------------------------------------------------- exact norms


def l2_resolvent_norm(model, z):
    """max_j 1/|lambda_j - z**m|, i.e. 1/dist(z**m, retained spectrum)."""
    vals = np.abs(resolvent_values(model, z))
    j = int(np.argmax(vals))
    witness = None
    if model.has_eigenfunctions:
        witness = GridFunction(model.basis.eigenfunctions(j)[0], model)
    return NormProbeResult(float(vals[j]), "exact-l2", 0, witness)


def l1_linf_norm(kernel):
    """max |K(x, y)| over the grid; first index wins ties."""
    a = np.abs(np.asarray(kernel.values))
    if a.size == 0:
        return NormProbeResult(0.0, "exact-l1linf")
    return NormProbeResult(float(a.flat[int(np.argmax(a))]), "exact-l1linf")


# ---------------------------------------------------------------- ascent


def _duality(v, r):
    """|v|**(r-1) times the phase of v."""
    a = np.abs(v)
    phase = np.where(a > 0, v / np.where(a > 0, a, 1.0), 0.0)
    return a ** (r - 1.0) * phase


def _norm(weights, v, r):
    return float(np.sum(weights * np.abs(v) ** r) ** (1.0 / r))


def pq_lower_bound(model, mult, p, q, max_iter=200, tol=1e-10, *, seed=0, u0=None):
    """Nonlinear power ascent for ||alpha(Q)||_{L^p -> L^q}.

    u <- phi_{p'}(T* phi_q(T u)), normalized in L^p, where phi_r(v) =
    |v|**(r-1) * phase(v) and T* = conj(alpha)(Q) is the adjoint for the
    quadrature inner product.  By Hoelder and duality each step can only
    raise ||Tu||_q / ||u||_p; a step that would lower it (rounding) is
    rejected and the run stops.
    """
    if not (1 < p <= 2 <= q < np.inf):
        raise LabError(f"need 1 < p <= 2 <= q < inf, got p={p}, q={q}")
    basis = model.require_basis()
    w = basis.weights
    vals = np.asarray(mult(model.mu), dtype=complex)
    adj = np.conj(vals)
    pp = p / (p - 1.0)
    rng = np.random.default_rng(seed)
    if u0 is None:
        u = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
    else:
        u = np.asarray(u0, dtype=complex).copy()

    def ratio(u):
        nu = _norm(w, u, p)
        return (_norm(w, basis.apply(vals, u), q) / nu) if nu > 0 else 0.0

    for _ in range(5):
        if ratio(u) > 0:
            break
        u = rng.standard_normal(basis.size) + 1j * rng.standard_normal(basis.size)
    u = u / _norm(w, u, p)
    best = ratio(u)
    history = [best]
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        s = basis.apply(adj, _duality(basis.apply(vals, u), q))
        cand = _duality(s, pp)
        nc = _norm(w, cand, p)
        if nc == 0:
            break
        cand = cand / nc
        r = ratio(cand)
        if r < best * (1 - 1e-12):
            converged = True
            break
        gain = r - best
        u, best = cand, max(best, r)
        history.append(best)
        if gain <= tol * best:
            converged = True
            break
    return NormProbeResult(best, "ascent-lower-bound", it, GridFunction(u, model),
                           converged, history)


def pq_lower_bound_restarts(model, mult, p, q, seeds, **kw):
    """Best of independent ascents; the running max is non-decreasing in seed count."""
    runs = parallel_map(lambda s: pq_lower_bound(model, mult, p, q, seed=s, **kw), seeds)
    running = np.maximum.accumulate([r.value for r in runs])
    best = max(runs, key=lambda r: r.value)
    return best, running


def brute_force_ratio(model, mult, p, q, samples, seed=0):
    """max over random real vectors of ||Tu||_q / ||u||_p."""
    basis = model.require_basis()
    if basis.size > 4096:
        raise LabError("brute force is limited to grids of at most 4096 points")
    w = basis.weights
    vals = np.asarray(mult(model.mu), dtype=complex)
    rng = np.random.default_rng(seed)
    # dense operator on the grid: columns are T applied to unit vectors
    T = np.stack([basis.apply(vals, e) for e in np.eye(basis.size)], axis=1)
    best = 0.0
    for start in range(0, samples, 4096):
        U = rng.standard_normal((min(4096, samples - start), basis.size))
        TU = U @ T.T
        num = np.sum(w * np.abs(TU) ** q, axis=1) ** (1.0 / q)
        den = np.sum(w * np.abs(U) ** p, axis=1) ** (1.0 / p)
        best = max(best, float(np.max(num / den)))
    return best


# ---------------------------------------------------------------- Bernstein


def default_beta_bump():
    """beta(s) = psi(s) - psi(2s): supported in 1/2 <= |s| <= 2."""
    psi = lambda s: smooth_step(2.0 - np.abs(s))
    return lambda s: psi(s) - psi(2.0 * np.asarray(s))


def bernstein_probe(model, beta_bump, alpha_list, q, r, x0_index=0):
    """Slope of log ||beta(Q/alpha) f_alpha||_r / ||f_alpha||_q against log alpha.

    f_alpha = psi(Q/(4 alpha)) delta_{x0} is a grid delta smoothed at scale
    1/alpha; psi(./4) equals 1 on the support of beta(./alpha), so
    beta(Q/alpha) f_alpha = beta(Q/alpha) delta_{x0}.
    """
    if abs(float(np.asarray(beta_bump(np.array([0.0])))[0])) > 0:
        raise LabError("beta must vanish at 0")
    basis = model.require_basis()
    w = basis.weights
    psi = lambda s: smooth_step(2.0 - np.abs(s))
    delta = np.zeros(basis.size)
    delta[x0_index] = 1.0 / w[x0_index]
    ratios = []
    for a in alpha_list:
        if 8.0 * a > model.cutoff:
            raise LabError(f"alpha={a} needs modes up to {8 * a:g}, beyond the cutoff")
        f = basis.apply(psi(model.mu / (4.0 * a)), delta)
        g = basis.apply(np.asarray(beta_bump(model.mu / a)), f)
        nf = _norm(w, f, q) if np.isfinite(q) else float(np.abs(f).max())
        ng = _norm(w, g, r) if np.isfinite(r) else float(np.abs(g).max())
        ratios.append(ng / nf)
    slope = float(np.polyfit(np.log(alpha_list), np.log(ratios), 1)[0])
    return slope, np.array(ratios)


# ---------------------------------------------------------------- cluster removal


def critical_exponents(n, m):
    if n <= m:
        raise LabError(f"need n > m for the exponents 2n/(n+-m), got n={n}, m={m}")
    return 2 * n / (n + m), 2 * n / (n - m)


def removed_resolvent(model, z, alpha):
    """Multiplier (1 - 1[alpha-1, alpha+1)) (tau**m - z**m)**-1."""
    model.check_window(alpha)
    zm = power(z, model.m)
    m = model.m
    return Multiplier(lambda tau: np.where((tau >= alpha - 1) & (tau < alpha + 1), 0.0,
                                           1.0 / (tau**m - zm)), f"removed alpha={alpha}")


def cluster_removal_probe(model, alpha_list, beta=1.0, *, max_iter=200, seed=0):
    """Rows (alpha, removed lower bound, full lower bound) at z = alpha + i beta.

    ``beta`` is a number or a function of alpha, with values in (0, 1].
    """
    p, q = critical_exponents(model.n, model.m)

    def one(alpha):
        beta_a = beta(alpha) if callable(beta) else beta
        if not 0 < beta_a <= 1:
            raise LabError(f"beta must lie in (0, 1], got {beta_a}")
        z = complex(alpha, beta_a)
        rem = pq_lower_bound(model, removed_resolvent(model, z, alpha), p, q,
                             max_iter=max_iter, seed=seed)
        full = pq_lower_bound(model, Multiplier.resolvent(z, model.m), p, q,
                              max_iter=max_iter, seed=seed)
        return alpha, rem.value, full.value

    return parallel_map(one, alpha_list)


# ---------------------------------------------------------------- blow-up


def _beta_rule(rule):
    if callable(rule):
        return rule
    if rule == "inv-k":
        return lambda k: 1.0 / k
    if isinstance(rule, str) and rule.startswith("const:"):
        c = float(rule.split(":", 1)[1])
        return lambda k: c
    raise LabError(f"unknown beta rule {rule!r}")


def window_diagonal_sup(model, values, mask):
    """sup_x sum_{j in mask} values_j |e_j(x)|**2, or the volume average when
    the model has no eigenfunctions (sum_j mult_j values_j / Vol)."""
    if model.has_eigenfunctions and model.kind != "custom":
        v = np.where(mask, values, 0.0)
        return float(model.basis.diagonal(v).max())
    return float(np.sum(model.mult[mask] * values[mask]) / model.volume)


def blowup_sequence(model, k_range, beta_rule="inv-k", *, centers=None):
    """Saturation quantities L_k along z_k -> boundary of the sector.

    L_k = alpha**-(n-m) |Im(-conj(z)**m)| sup_x sum_{|mu_j - alpha| window} |e_j|**2 / |mu_j**m - z**m|**2
    for branch 1 (z = alpha + i beta) and branch 2 (z = e^{2pi i/m}(alpha - i beta)).
    """
    from .spectra import saturation_density

    rule = _beta_rule(beta_rule)
    m, n = model.m, model.n
    out = []
    for k in k_range:
        if centers is not None:
            alpha = float(centers(k))
        elif model.kind == "zoll":
            alpha = float(model.mu[list(model.mode_ids).index(k)])
        else:
            # same placement as the Zoll clusters, c_k = k + (n-1)/2
            alpha = k + 0.5 * (n - 1)
        beta = float(rule(k))
        model.check_window(alpha, max(beta, 1.0))
        mask = (model.mu >= alpha - beta) & (model.mu < alpha + beta)
        dens = saturation_density(model, alpha, beta)
        for branch, z in ((1, complex(alpha, beta)),
                          (2, np.exp(2j * np.pi / m) * complex(alpha, -beta))):
            zm = power(z, m)
            vals = 1.0 / np.abs(model.lam - zm) ** 2
            diag = window_diagonal_sup(model, vals, mask)
            im = abs((-power(np.conj(z), m)).imag)
            L = alpha ** (-(n - m)) * im * diag
            out.append(SaturationSequence(int(k), alpha, beta, complex(z), branch, L, dens))
    return out


# ---------------------------------------------------------------- scalar checks


def scalar_region_inequalities(alphas, betas, m, ks=(2, 3, 5, 10)):
    """Worst ratios of the three scalar inequalities on the grid.

    * im_ratio: min Im z**m / ((m/2) beta alpha**(m-1)), should be >= 1 for large alpha;
    * shift_ratio: max |z**m - (alpha + i)**m| / alpha**(m-1) (bounded);
    * gap_ratio: min |tau**m - z**m| / ((k-1)(alpha+k)**(m-1)) for tau in [alpha+k-1, alpha+k).
    Also returns alpha0, the smallest grid alpha from which im_ratio >= 1 holds.
    """
    alphas = np.asarray(alphas, dtype=float)
    im_rows = []
    shift, gap = 0.0, np.inf
    for a in alphas:
        worst = np.inf
        for b in betas:
            z = complex(a, b)
            zm = power(z, m)
            worst = min(worst, zm.imag / (0.5 * m * b * a ** (m - 1)))
            shift = max(shift, abs(zm - power(complex(a, 1.0), m)) / a ** (m - 1))
            for k in ks:
                for frac in (0.0, 0.5, 0.999):
                    tau = a + k - 1 + frac
                    gap = min(gap, abs(tau**m - zm) / ((k - 1) * (a + k) ** (m - 1)))
        im_rows.append(worst)
    im_rows = np.array(im_rows)
    bad = np.nonzero(im_rows < 1.0)[0]
    alpha0 = float(alphas[0]) if bad.size == 0 else (
        float(alphas[bad[-1] + 1]) if bad[-1] + 1 < alphas.size else math.inf)
    return {"im_ratio": float(im_rows.min()), "im_ratio_by_alpha": im_rows,
            "shift_ratio": float(shift), "gap_ratio": float(gap), "alpha0": alpha0}
