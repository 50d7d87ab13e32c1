"""Acceptance checks, one function per criterion, grouped into suites."""

from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import multiplier as mp
from . import oscint as oi
from . import probe as pr
from . import residue as rs
from . import spectra as sp
from .region import SectorParams, power, xi_membership


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    seconds: float = 0.0
    budget: float | None = None

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        budget = f" (budget {self.budget:g}s)" if self.budget else ""
        return f"[{status}] {self.number:2d} {self.title}: {vals}; {self.seconds:.1f}s{budget}"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def _euclid(x):
    return np.linalg.norm(x, axis=-1)


def _timed(number, title, budget, fn):
    t0 = time.perf_counter()
    passed, measured = fn()
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        passed = False
        measured["over_budget"] = True
    return CriterionResult(number, title, bool(passed), measured, dt, budget)


# ---------------------------------------------------------------- 1-5


def check_residue_identity(seed=42, count=200):
    def run():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for i in range(count):
            m = (2, 4, 6)[i % 3]
            z = rs.random_sector_points(rng, m, 0.2, 1, 0.5, 4.0)[0]
            t = float(rng.uniform(-2.0, 2.0))
            closed = rs.fourier_transform_mz(t, z, m)
            oracle = rs.fourier_transform_oracle(t, z, m)
            worst = max(worst, abs(closed - oracle) / abs(oracle))
        spot1 = abs(rs.fourier_transform_mz(1.0, 1j, 2) - math.pi / math.e)
        spot2 = abs(rs.fourier_transform_mz(0.0, cmath.exp(1j * math.pi / 4), 4) - math.pi / math.sqrt(2))
        ok = worst < 1e-6 and spot1 < 1e-12 and spot2 < 1e-12
        return ok, {"max_rel_err": worst, "spot_pi_over_e": spot1, "spot_pi_over_sqrt2": spot2}

    return _timed(1, "residue identity vs quadrature oracle", 30.0, run)


def check_algebraic_identities(seed=42, count=1000):
    def run():
        rng = np.random.default_rng(seed)
        worst_res, worst_pf = 0.0, 0.0
        for i in range(count):
            m = (2, 4, 6, 8)[i % 4]
            z = rs.random_sector_points(rng, m, 0.1, 1, 0.5, 10.0)[0]
            # both sides cancel like (|tau|/|z|)**(m-1) in floating point;
            # sample where that amplification stays below ~1e3
            tau = float(rng.uniform(0.0, 3.0 * abs(z)))
            lhs, rhs = rs.resolvent_multiplier_identity(tau, z, m)
            worst_res = max(worst_res, abs(lhs - rhs) / abs(lhs))
            y = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 3.0 * abs(z)
            lhs, rhs = rs.partial_fraction_sides(y, z, m)
            worst_pf = max(worst_pf, abs(lhs - rhs) / abs(lhs))
        coef = 0.0
        for m in (2, 4, 6, 8, 16, 32):
            A = rs.partial_fractions(m).A
            coef = max(coef, float(np.max(np.abs(A - rs.roots_of_unity(m) / m))))
        ok = worst_res < 1e-10 and worst_pf < 1e-10 and coef < 1e-12
        return ok, {"resolvent_rel": worst_res, "partial_fraction_rel": worst_pf, "coeff_err": coef}

    return _timed(2, "resolvent and partial-fraction identities", 5.0, run)


def check_pole_sector(seed=42, count=10_000):
    def run():
        rng = np.random.default_rng(seed)
        violations, margin = 0, math.inf
        for m in (2, 4, 6, 8):
            for delta in (0.05, 0.5, 2.0):
                zs = rs.random_sector_points(rng, m, delta, count // 12 + 1, delta, 50.0)
                for z in zs:
                    if not xi_membership(z, SectorParams(m, delta)):
                        continue
                    im = rs.poles(z, m).upper.imag
                    violations += int(np.sum(im < delta))
                    margin = min(margin, float(im.min() - delta))
        return violations == 0, {"violations": violations, "min_margin": margin}

    return _timed(3, "poles of the sector stay above Im = delta", None, run)


def symbol_decay_sups(m, moduli=(2.0, 20.0), tol=1e-17):
    tau = np.concatenate([np.linspace(0.0, 50.0, 1001), np.geomspace(50.0, 1000.0, 600)[1:]])
    out = []
    for r in moduli:
        z = r * cmath.exp(1j * math.pi / m)
        S = mp.tilde_piece(tau, z, m, tol=tol)
        out.append(float(np.max((1 + tau) ** m * np.abs(S))))
    return out


def check_symbol_decay():
    def run():
        measured = {}
        ok = True
        for m in (2, 4):
            s2, s20 = symbol_decay_sups(m)
            change = abs(s20 - s2) / s2
            measured[f"sup_m{m}"] = [s2, s20]
            measured[f"change_m{m}"] = change
            ok &= bool(np.isfinite(s2) and np.isfinite(s20) and change < 0.05)
        tau = np.linspace(0.0, 100.0, 201)
        vanish = 0.0
        for m in (2, 4):
            for r in (2.0, 20.0, 200.0):
                z = r * cmath.exp(1j * math.pi / m)
                j0 = max(0, math.ceil(math.log2(r)))
                for j in range(j0, j0 + 3):
                    vanish = max(vanish, float(np.max(np.abs(mp.dyadic_piece(tau, z, m, j)))))
        measured["dyadic_vanish_max"] = vanish
        ok &= vanish < 1e-12
        return ok, measured

    return _timed(4, "symbol decay of S~ and dyadic vanishing", 120.0, run)


def check_nonlocal(seed=42):
    def run():
        rng = np.random.default_rng(seed)
        measured = {}
        ok = True
        for m in (2, 4):
            for delta in (0.3, 1.0):
                zs = rs.random_sector_points(rng, m, delta, 12, 1.0, 30.0)
                sups = []
                for N in (400, 800):
                    tau = np.linspace(0.0, 60.0, N + 1)
                    sups.append(delta * max(float(np.max(np.abs(mp.nonlocal_multiplier(tau, z, m))))
                                            for z in zs))
                change = abs(sups[1] - sups[0]) / sups[1]
                measured[f"delta_r_m{m}_d{delta}"] = sups[1]
                ok &= bool(np.isfinite(sups[1]) and change < 0.05)
        for m in (2, 4):
            grid = [1.0, 10.0, 100.0, 500.0, 1000.0]
            per, const = mp.series_bound_probe(m, grid)
            tail_change = abs(per[-1] - per[-2]) / per[-1]
            measured[f"series_const_m{m}"] = const
            measured[f"series_tail_change_m{m}"] = tail_change
            ok &= bool(max(per) <= const and tail_change < 0.05)
        return ok, measured

    return _timed(5, "nonlocal multiplier and series bound", None, run)


# ---------------------------------------------------------------- 6-9


def check_weyl():
    def run():
        T2 = sp.build_torus_model(2, _euclid, 41.0)
        T3 = sp.build_torus_model(3, _euclid, 21.0)
        c2 = sp.counting_function(T2, 40.0) / 40.0**2
        c3 = sp.counting_function(T3, 20.0) / 20.0**3
        e2 = abs(c2 - math.pi) / math.pi
        e3 = abs(c3 - 4 * math.pi / 3) / (4 * math.pi / 3)
        return e2 < 0.05 and e3 < 0.05, {"N40_over_1600": c2, "rel_err_T2": e2,
                                         "N20_over_8000": c3, "rel_err_T3": e3}

    return _timed(6, "Weyl law on T^2 and T^3", 10.0, run)


def check_clusters():
    def run():
        s3 = sp.cluster_report(sp.build_zoll_model(3, 200, jitter=0.5, seed=42), C=0.5)[1]
        s2 = sp.cluster_report(sp.build_zoll_model(2, 200, jitter=0.5, seed=42), C=0.5)[1]
        ok = abs(s3 - 2.0) <= 0.05 and abs(s2 - 1.0) <= 0.05
        return ok, {"degree_n3": s3, "degree_n2": s2}

    return _timed(7, "Zoll cluster multiplicity growth", None, run)


def check_blowup():
    def run():
        ks = np.arange(5, 61)
        Z = sp.build_zoll_model(3, 70, eigenfunctions=True)
        rows = pr.blowup_sequence(Z, ks)
        measured = {}
        ok = True
        for br in (1, 2):
            L = np.array([s.L_k for s in rows if s.branch == br])
            worst = float(np.min(L / L[0] / (ks / 10.0)))
            measured[f"min_growth_branch{br}"] = worst
            ok &= worst >= 1.0
        T = sp.build_torus_model(3, _euclid, 64.0)
        L = np.array([s.L_k for s in pr.blowup_sequence(T, ks) if s.branch == 1])
        spread = float(L.max() / L.min())
        measured["torus_max_over_min"] = spread
        ok &= spread < 3.0
        return ok, measured

    return _timed(8, "blow-up along the saturation sequence", 120.0, run)


def check_cluster_removal():
    def run():
        # the cutoff sits far above alpha = 50: clusters missing above the
        # cutoff would otherwise shrink the removed norm near the top of the range
        Z = sp.build_zoll_model(3, 240, eigenfunctions=True)
        alphas = [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0]
        rows = pr.cluster_removal_probe(Z, alphas, beta=1.0)
        removed = np.array([r[1] for r in rows])
        spread = float(removed.max() / removed.min())
        at30 = pr.cluster_removal_probe(Z, [30.0], beta=lambda a: 1.0 / a)[0]
        gain = at30[2] / at30[1]
        ok = spread <= 2.0 and gain > 5.0
        return ok, {"removed_max_over_min": spread, "full_over_removed_at_30": gain}

    return _timed(9, "cluster removal uniformity", None, run)


# ---------------------------------------------------------------- 10-12


def check_stationary_phase(seed=42):
    def run():
        rng = np.random.default_rng(seed)
        circle = oi.euclid(2)
        j0_err = 0.0
        for r in np.concatenate([[0.0, 0.1, 1.0, 10.0, 50.0], rng.uniform(0.0, 50.0, 25)]):
            th = rng.uniform(0, 2 * np.pi)
            v, _ = oi.surface_measure_ft(circle, [r * math.cos(th), r * math.sin(th)])
            j0_err = max(j0_err, abs(v - oi.bessel_j0_series(r) / (2 * np.pi)))
        s2 = oi.decay_exponent_fit(circle, [1.0, 0.3], (5.0, 500.0))[0]
        s3 = oi.decay_exponent_fit(oi.euclid(3), [1.0, 0.3, 0.2], (5.0, 500.0))[0]
        l4 = oi.lp4(2)
        flagged = not oi.strict_convexity_check(l4)["strictly_convex"]
        sl4 = oi.decay_exponent_fit(l4, [1.0, 0.0], (5.0, 500.0))[0]
        ok = (j0_err < 1e-6 and abs(s2 + 0.5) <= 0.15 and abs(s3 + 1.0) <= 0.15
              and flagged and sl4 > -0.35)
        return ok, {"j0_abs_err": j0_err, "exponent_n2": s2, "exponent_n3": s3,
                    "lp4_flagged": flagged, "lp4_axis_exponent": sl4}

    return _timed(10, "stationary phase decay of cosphere measures", 180.0, run)


def resolvent_probe_set(count=50, seed=42):
    """(x, w) pairs with |x|, |w| log-uniform in [0.5, 20] and arg w away from 0."""
    rng = np.random.default_rng(seed)
    r = np.exp(rng.uniform(math.log(0.5), math.log(20.0), count))
    phi = rng.uniform(0, 2 * np.pi, count)
    s = np.exp(rng.uniform(math.log(0.5), math.log(20.0), count))
    th = rng.uniform(0.05, 2 * np.pi - 0.05, count)
    return [(np.array([ri * math.cos(p), ri * math.sin(p)]), si * cmath.exp(1j * t))
            for ri, p, si, t in zip(r, phi, s, th)]


def check_weighted_resolvent(seed=42):
    def run():
        sym = oi.euclid(2)
        probes = resolvent_probe_set(50, seed)
        base, _ = oi.bound_ratio(sym, probes)
        fine, _ = oi.bound_ratio(sym, probes, order_scale=2.0)
        change = abs(fine - base) / fine
        rng = np.random.default_rng(seed + 1)
        scale_err = 0.0
        for x, w in probes[:8]:
            x = x * rng.uniform(0.5, 2.0)
            s = abs(w)
            a = oi.weighted_resolvent_integral(sym, x, w)
            b = s * oi.weighted_resolvent_integral(sym, s * x, w / s)
            scale_err = max(scale_err, abs(a - b) / abs(a))
        heav = 0.0
        for alpha in (0.5, -0.5, 2.0, -2.0):
            for t in (-1.0, 0.5, 2.0):
                heav = max(heav, abs(oi.heaviside_transform(alpha, t) - oi.heaviside_closed_form(alpha, t)))
        ok = np.isfinite(fine) and change < 0.03 and scale_err < 1e-6 and heav < 1e-6
        return ok, {"bound_ratio": fine, "refinement_change": change,
                    "scaling_rel_err": scale_err, "heaviside_abs_err": heav}

    return _timed(11, "weighted resolvent integral bound", None, run)


def check_norm_probe(seed=42):
    def run():
        runs = []
        T1 = sp.build_torus_model(1, _euclid, 1.5, grid_resolution=1)
        mult = mp.Multiplier.resolvent(1j, 2)
        r22 = pr.pq_lower_bound(T1, mult, 2, 2, seed=seed)
        runs.append(r22)
        brute = pr.brute_force_ratio(T1, mult, 2, 2, 100_000, seed=seed)
        T2 = sp.build_torus_model(2, _euclid, 12.0, grid_resolution=32)
        Z = sp.build_zoll_model(3, 30, eigenfunctions=True)
        for model, z in ((T2, complex(6.0, 0.3)), (Z, complex(10.0, 0.5))):
            for p, q in ((2.0, 2.0), (1.5, 4.0), (1.2, 6.0)):
                for s in range(3):
                    runs.append(pr.pq_lower_bound(model, mp.Multiplier.resolvent(z, 2), p, q, seed=s))
        monotone = all(np.all(np.diff(r.history) >= 0) for r in runs)
        diff = abs(r22.value - brute)
        return monotone and diff < 1e-4, {"runs": len(runs), "monotone": monotone,
                                          "ascent_22": r22.value, "brute_force": brute,
                                          "abs_diff": diff}

    return _timed(12, "norm-probe soundness", None, run)


CHECKS = {
    1: check_residue_identity,
    2: check_algebraic_identities,
    3: check_pole_sector,
    4: check_symbol_decay,
    5: check_nonlocal,
    6: check_weyl,
    7: check_clusters,
    8: check_blowup,
    9: check_cluster_removal,
    10: check_stationary_phase,
    11: check_weighted_resolvent,
    12: check_norm_probe,
}

SUITES = {
    "identities": (1, 2, 4, 5),
    "region": (3,),
    "spectra": (6, 7),
    "blowup": (8, 9, 12),
    "oscint": (10, 11),
    "all": tuple(range(1, 13)),
}


def run_suite(name, echo=None):
    if name not in SUITES:
        raise KeyError(name)
    results = []
    for k in SUITES[name]:
        res = CHECKS[k]()
        results.append(res)
        if echo is not None:
            echo(res.line())
    return results
