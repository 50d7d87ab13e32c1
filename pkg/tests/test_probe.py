import cmath
import math

import numpy as np
import pytest

from resolventlab import CutoffProximity, LabError, SpectralCollision
from resolventlab.multiplier import KernelMatrix, Multiplier, resolvent_kernel
from resolventlab.probe import (
    _norm,
    bernstein_probe,
    blowup_sequence,
    brute_force_ratio,
    cluster_removal_probe,
    critical_exponents,
    default_beta_bump,
    l1_linf_norm,
    l2_resolvent_norm,
    pq_lower_bound,
    pq_lower_bound_restarts,
    removed_resolvent,
    scalar_region_inequalities,
)
from resolventlab.region import dist_to_sector_boundary, power, xi_membership, SectorParams
from resolventlab.spectra import ModelSpectrum, build_torus_model, build_zoll_model


def euclid(x):
    return np.linalg.norm(x, axis=-1)


@pytest.fixture(scope="module")
def zoll():
    return build_zoll_model(3, 70, eigenfunctions=True)


@pytest.fixture(scope="module")
def torus2():
    return build_torus_model(2, euclid, 10.0, grid_resolution=1)


def two_level(lams):
    mu = np.sqrt(np.asarray(lams, dtype=float))
    return ModelSpectrum(n=3, m=2, mu=mu, mult=np.ones(mu.size, dtype=int), volume=1.0,
                         cutoff=10.0, kind="custom")


def witness_ratio(model, mult, res, p, q):
    w = model.basis.weights
    u = res.witness.values
    Tu = model.basis.apply(mult(model.mu), u)
    return _norm(w, Tu, q) / _norm(w, u, p)


# ---------------------------------------------------------------- exact norms


def test_l2_examples():
    model = two_level([1.0, 4.0])
    z = cmath.sqrt(1 + 1j)
    assert l2_resolvent_norm(model, z).value == pytest.approx(1.0, rel=1e-12)
    vals = [l2_resolvent_norm(model, cmath.sqrt(2.5 + 1j * eta)).value for eta in (1e-2, 1e-4, 1e-6)]
    assert vals[-1] == pytest.approx(1 / 1.5, rel=1e-9)
    grid = [l2_resolvent_norm(model, cmath.sqrt(1.2 + 1j * eta)).value for eta in (0.1, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(grid, grid[1:]))


def test_l2_collision():
    with pytest.raises(SpectralCollision):
        l2_resolvent_norm(two_level([1.0, 4.0]), 1.0 + 0j)


def test_l2_witness(torus2):
    z = 3.1 + 0.2j
    res = l2_resolvent_norm(torus2, z)
    assert witness_ratio(torus2, Multiplier.resolvent(z, 2), res, 2, 2) == pytest.approx(res.value, rel=1e-8)


def test_l1_linf_examples(torus2):
    assert l1_linf_norm(KernelMatrix(np.zeros((3, 3)), torus2)).value == 0.0
    e = np.array([0.5, -2.0j, 1.0])
    assert l1_linf_norm(KernelMatrix(np.outer(e, e.conj()), torus2)).value == pytest.approx(4.0)
    K = resolvent_kernel(torus2, 2.5j, dense=False)
    a = np.abs(K.values[0])
    assert a[0] == a.max()


# ---------------------------------------------------------------- ascent


def test_pq_matches_l2(torus2):
    z = 4.05 + 0.3j
    res = pq_lower_bound(torus2, Multiplier.resolvent(z, 2), 2.0, 2.0, seed=1)
    assert res.value == pytest.approx(l2_resolvent_norm(torus2, z).value, rel=1e-6)


def test_pq_rank_one_closed_form():
    n = 2
    model = build_torus_model(n, euclid, 3.0, grid_resolution=1)
    mult = Multiplier.indicator(0.0, 0.5)  # only the constant mode k = 0
    for p, q in ((1.5, 4.0), (1.2, 3.0), (2.0, 6.0)):
        pp = p / (p - 1)
        norm_e = lambda r: (2 * math.pi) ** (n / r) * (2 * math.pi) ** (-n / 2)
        res = pq_lower_bound(model, mult, p, q)
        assert res.value == pytest.approx(norm_e(q) * norm_e(pp), rel=1e-8)


@pytest.mark.parametrize("p,q", [(2.0, 2.0), (1.5, 4.0), (1.2, 6.0)])
def test_pq_monotone_and_witness(zoll, torus2, p, q):
    for model, z in ((torus2, 5.0 + 0.3j), (zoll, 12.0 + 0.4j)):
        mult = Multiplier.resolvent(z, 2)
        for seed in range(3):
            res = pq_lower_bound(model, mult, p, q, seed=seed)
            assert np.all(np.diff(res.history) >= 0)
            assert witness_ratio(model, mult, res, p, q) == pytest.approx(res.value, rel=1e-8)


def test_pq_rejects_bad_exponents(torus2):
    mult = Multiplier.resolvent(1j, 2)
    for p, q in ((1.0, 2.0), (2.5, 3.0), (1.5, 1.8), (1.5, np.inf)):
        with pytest.raises(LabError):
            pq_lower_bound(torus2, mult, p, q)


def test_pq_nonconvergence_flag(zoll):
    res = pq_lower_bound(zoll, Multiplier.resolvent(20.0 + 0.05j, 2), 1.2, 6.0, max_iter=1)
    assert res.iterations == 1 and not res.converged and res.value > 0


def test_restarts_running_max(torus2):
    best, running = pq_lower_bound_restarts(torus2, Multiplier.resolvent(5.5 + 0.5j, 2), 1.5, 4.0,
                                            seeds=range(20), max_iter=30)
    assert np.all(np.diff(running) >= 0) and running[-1] == best.value


def test_three_mode_brute_force():
    model = build_torus_model(1, euclid, 1.5, grid_resolution=1)
    assert model.mu.size == 3
    mult = Multiplier.resolvent(1j, 2)
    res = pq_lower_bound(model, mult, 2, 2)
    brute = brute_force_ratio(model, mult, 2, 2, 100_000, seed=3)
    assert brute <= res.value + 1e-12
    assert abs(res.value - brute) < 1e-4


# ---------------------------------------------------------------- Bernstein


def test_bernstein_slopes():
    T2 = build_torus_model(2, euclid, 130.0, grid_resolution=1)
    b = default_beta_bump()
    alphas = [2, 4, 8, 16]
    assert bernstein_probe(T2, b, alphas, 1, np.inf)[0] == pytest.approx(2.0, abs=0.1)
    assert abs(bernstein_probe(T2, b, alphas, 2, 2)[0]) < 0.1
    for q, r in ((1, 2), (1.5, 4)):
        assert bernstein_probe(T2, b, alphas, q, r)[0] <= 2 * (1 / q - 1 / r) + 0.1
    T3 = build_torus_model(3, euclid, 50.0, grid_resolution=1)
    assert bernstein_probe(T3, b, [2, 3, 4, 6], 1, 2)[0] == pytest.approx(1.5, abs=0.1)


def test_bernstein_rejects_bad_bump_and_cutoff():
    T2 = build_torus_model(2, euclid, 40.0, grid_resolution=1)
    with pytest.raises(LabError):
        bernstein_probe(T2, lambda s: np.ones_like(s), [2, 4], 1, 2)
    with pytest.raises(LabError):
        bernstein_probe(T2, default_beta_bump(), [2, 8], 1, 2)


# ---------------------------------------------------------------- cluster removal


def test_critical_exponents():
    assert critical_exponents(3, 2) == pytest.approx((1.2, 6.0))
    with pytest.raises(LabError):
        critical_exponents(2, 2)


def test_cluster_removal_flat_and_dominated():
    Z = build_zoll_model(3, 240, eigenfunctions=True)
    rows = cluster_removal_probe(Z, [10.0, 20.0, 30.0, 40.0, 50.0], beta=1.0)
    removed = np.array([r[1] for r in rows])
    assert removed.max() <= 2 * removed.min()
    alpha, rem, full = cluster_removal_probe(Z, [30.0], beta=lambda a: 1 / a)[0]
    assert full / rem > 5


def test_cluster_removal_truncation_effect():
    # a low cutoff drops clusters above alpha, so the removed norm sags near the top
    alphas = [10.0, 50.0]
    low = [r[1] for r in cluster_removal_probe(build_zoll_model(3, 60, eigenfunctions=True), alphas)]
    high = [r[1] for r in cluster_removal_probe(build_zoll_model(3, 240, eigenfunctions=True), alphas)]
    assert low[0] / low[1] > high[0] / high[1]


def test_removal_of_empty_window_is_identity():
    T = build_torus_model(2, euclid, 20.0, grid_resolution=1)
    gap = (1.4143, 1.99)  # no |k| strictly between sqrt(2) and 2
    alpha = 0.5 * (gap[0] + gap[1])
    mult_r = Multiplier(lambda t: np.where((t >= gap[0]) & (t < gap[1]), 0.0, 1 / (t**2 - power(alpha + 0.5j, 2))))
    full = Multiplier.resolvent(alpha + 0.5j, 2)
    a = pq_lower_bound(T, mult_r, 1.5, 4.0, seed=0).value
    b = pq_lower_bound(T, full, 1.5, 4.0, seed=0).value
    assert a == pytest.approx(b, rel=1e-12)


def test_removed_resolvent_window(zoll):
    mult = removed_resolvent(zoll, 20.5 + 1j, 20.5)
    assert mult(np.array([19.5, 20.0, 21.4]))[:3].tolist() == [0, 0, 0]
    assert mult(np.array([21.5]))[0] != 0
    with pytest.raises(CutoffProximity):
        removed_resolvent(zoll, 70.0 + 1j, 70.0)
    with pytest.raises(LabError):
        cluster_removal_probe(zoll, [20.0], beta=2.0)


# ---------------------------------------------------------------- blow-up


def test_blowup_branches_and_growth(zoll):
    ks = np.arange(5, 61)
    rows = blowup_sequence(zoll, ks)
    for br in (1, 2):
        L = np.array([s.L_k for s in rows if s.branch == br])
        assert np.all(L / L[0] >= ks / 10)
        assert L[-1] / L[0] > 10
    one = [s for s in rows if s.branch == 1]
    two = [s for s in rows if s.branch == 2]
    for a, b in zip(one, two):
        assert a.L_k == pytest.approx(b.L_k, rel=1e-12)
        assert a.z_k == complex(a.alpha_k, a.beta_k)
        w = b.z_k * cmath.exp(-2j * math.pi / 2)
        assert w.real == pytest.approx(b.alpha_k) and -w.imag == pytest.approx(b.beta_k)
        assert xi_membership(a.z_k, SectorParams(2))
    assert [s.density_k for s in one[:3]] == pytest.approx([5, 6, 7])


def test_blowup_without_eigenfunctions_uses_volume_average():
    Z = build_zoll_model(3, 70)
    rows = blowup_sequence(Z, range(5, 61))
    L = np.array([s.L_k for s in rows if s.branch == 1])
    assert L[-1] / L[0] > 10


def test_blowup_torus_control():
    T = build_torus_model(3, euclid, 64.0)
    L = np.array([s.L_k for s in blowup_sequence(T, range(5, 61)) if s.branch == 1])
    assert L.max() / L.min() < 3


def test_blowup_rules_and_cutoff(zoll):
    rows = blowup_sequence(zoll, [10], "const:0.5")
    assert rows[0].beta_k == 0.5
    with pytest.raises(LabError):
        blowup_sequence(zoll, [10], "sqrt")
    with pytest.raises(CutoffProximity):
        blowup_sequence(zoll, [69])


# ---------------------------------------------------------------- scalar inequalities


def test_scalar_examples():
    assert power(10 + 0.5j, 2).imag == pytest.approx(10.0)
    assert power(10 + 1j, 4).imag == pytest.approx(3960.0)
    for m in (2, 4):
        res = scalar_region_inequalities(np.arange(10.0, 200.0, 5.0), [0.1, 0.3, 0.7, 1.0], m)
        assert res["im_ratio"] >= 1.0
        assert res["alpha0"] <= 10.0
        assert np.isfinite(res["shift_ratio"]) and res["gap_ratio"] > 0


def test_region_uniformity_surrogate():
    delta = 0.3
    Z = build_zoll_model(3, 70)
    T = build_torus_model(3, euclid, 70.0)
    for model in (Z, T):
        m = model.m
        for frac in (0.05, 0.25, 0.5):
            scaled = []
            for r in np.geomspace(5, 50, 12):
                z = cmath.rect(r, frac * math.pi)
                if dist_to_sector_boundary(z, m) < delta:
                    z = complex(math.sqrt(r * r - delta * delta), delta)
                scaled.append(l2_resolvent_norm(model, z).value * r ** (m - 1))
            assert max(scaled) <= 4 * scaled[0]
