"""Acceptance gate: pinned reference values, envelopes, runtime budgets.

One test per criterion; each asserts its numerical contract and its own
wall-clock budget, and prints the measured values for the record.
"""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from mcmc_certify import cli
from mcmc_certify.bounds import (dm_geometric, doeblin_tv_bound,
                                 gaussian_dm_certificate,
                                 gaussian_minorization_epsilon,
                                 gaussian_tv_bound, gaussian_tv_geometric,
                                 gaussian_w1_bound, mixing_time, optimize_rho)
from mcmc_certify.chains import (GaussianChain, Rng, RwmhChain, cosine_target,
                                 imh_chain, imh_doeblin_epsilon, kernel_spec,
                                 rwmh_move_mass_at_origin)
from mcmc_certify.coupling import (crn_strategy, doeblin_strategy, fixed_pair,
                                   point_vs_stationary, simulate_coupling,
                                   simulate_one_shot)
from mcmc_certify.spectral import (conductance_exact, discretize_gaussian1d,
                                   discretize_imh, gaussian_norm_upper_iso,
                                   grid_evolve, grid_l2_distance,
                                   grid_tv_distance, norm_bracket_imh,
                                   operator_norm, rayleigh_lower,
                                   rwmh_norm_lower, sigma_star, spectral_gap)
from tests.conftest import random_reversible_grid

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def test_criterion_01_minorization_mass_reference():
    # reference value 2.28e-7 (3 significant figures), tolerance 2%
    start = time.perf_counter()
    eps = gaussian_minorization_epsilon(10, 0.5, 4.0)
    elapsed = time.perf_counter() - start
    print(f"criterion 1: eps = {eps:.8e} ({elapsed * 1e3:.1f} ms)")
    assert abs(eps / 2.28e-7 - 1.0) <= 0.02
    assert elapsed < 1.0


def test_criterion_02_optimized_rate_reference():
    # reference value 1 - rho = 6e-8 (1 significant figure), factor-2 band
    start = time.perf_counter()
    cert = gaussian_dm_certificate(GaussianChain(p=10, alpha=0.5), 4.0)
    r_star, rho_star = optimize_rho(cert)
    elapsed = time.perf_counter() - start
    gap = 1.0 - rho_star
    print(f"criterion 2: r* = {r_star:.15f}, 1-rho* = {gap:.6e} "
          f"({elapsed * 1e3:.1f} ms)")
    assert 3e-8 <= gap <= 1.2e-7
    assert elapsed < 1.0


def test_criterion_03_imh_exact_norm():
    # s = 1 + cos(2 pi x)/2 has sup 1.5, so the norm is exactly 1/3; the
    # analytic enclosure must pin it and the 400-point grid must agree
    start = time.perf_counter()
    chain = imh_chain(cosine_target())
    loose = norm_bracket_imh(chain, width=1e-4)
    tight = norm_bracket_imh(chain, width=1e-5)
    grid_norm = operator_norm(discretize_imh(chain, 400))
    elapsed = time.perf_counter() - start
    print(f"criterion 3: upper = {loose.upper:.15f}, "
          f"lower(1e-5) = {tight.lower:.15f}, grid = {grid_norm:.8f} "
          f"({elapsed:.2f} s)")
    assert loose.upper == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert tight.lower <= 1.0 / 3.0 + 1e-12
    assert 1.0 / 3.0 - tight.lower <= 1e-4
    assert tight.lower >= loose.lower - 1e-12  # shrinking width tightens
    assert grid_norm == pytest.approx(1.0 / 3.0, abs=1e-3)
    assert elapsed < 10.0


def test_criterion_04_gaussian_exact_norm():
    start = time.perf_counter()
    for alpha in (0.1, 0.3, 0.5, 0.7, 0.9):
        g = discretize_gaussian1d(GaussianChain(p=1, alpha=alpha), 80)
        norm = operator_norm(g)
        lower = rayleigh_lower(g, g.points)
        assert norm == pytest.approx(alpha, abs=0.01)
        assert lower >= alpha - 0.01
    elapsed = time.perf_counter() - start
    print(f"criterion 4: five grids pass ({elapsed:.2f} s)")
    assert elapsed < 10.0


def test_criterion_05_coupling_sandwich():
    start = time.perf_counter()
    replicas, horizon = 100_000, 15

    # (a) Doeblin split on IMH vs the uniform-minorization TV curve
    ch = imh_chain(cosine_target())
    eps = imh_doeblin_epsilon(ch)
    est = simulate_coupling(doeblin_strategy(), kernel_spec(ch),
                            fixed_pair(0.1, 0.9), horizon, replicas,
                            Rng(seed=20_101))
    for t in range(1, horizon + 1):
        assert (est.p_unequal[t] - 3.0 * est.se_unequal[t]
                <= doeblin_tv_bound(eps, t))

    # (b) CRN on the Gaussian chain vs the W1 curve (X0 at norm 2, Y0
    # stationary, so the coupling distance dominates the W1 distance)
    chain = GaussianChain(p=3, alpha=0.5)
    x0 = np.array([2.0, 0.0, 0.0])
    crn = simulate_coupling(crn_strategy(), kernel_spec(chain),
                            point_vs_stationary(x0, chain), horizon,
                            replicas, Rng(seed=20_202))
    for t in range(1, horizon + 1):
        assert (crn.mean_psi[t] - 3.0 * crn.se_psi[t]
                <= gaussian_w1_bound(2.0, chain, t))

    # (c) CRN-then-one-maximal-step vs the TV curve
    shot = simulate_one_shot(chain, x0, np.zeros(3), horizon, replicas,
                             Rng(seed=20_303))
    for t in range(1, horizon + 1):
        assert (shot.p_unequal[t] - 3.0 * shot.se_unequal[t]
                <= gaussian_tv_bound(2.0, chain, t))

    elapsed = time.perf_counter() - start
    print(f"criterion 5: doeblin p1 = {est.p_unequal[1]:.5f}, "
          f"crn psi1 = {crn.mean_psi[1]:.5f}, "
          f"one-shot p1 = {shot.p_unequal[1]:.5f} ({elapsed:.2f} s)")
    assert elapsed < 180.0


def test_criterion_06_crn_exact_contraction():
    chain = GaussianChain(p=3, alpha=0.5)
    x0 = np.array([2.0, 0.0, 0.0])
    y0 = np.zeros(3)
    kw = dict(init=fixed_pair(x0, y0), horizon=30, replicas=64)
    est = simulate_coupling(crn_strategy(), kernel_spec(chain),
                            rng=Rng(seed=1), **kw)
    ts = np.arange(31)
    expected = 2.0 * chain.alpha ** ts
    rel = np.max(np.abs(est.mean_psi / expected - 1.0))
    print(f"criterion 6: max relative deviation = {rel:.3e}")
    assert rel <= 1e-12
    # zero sampling variance: a different seed gives the identical curve,
    # and the reported standard error is pure summation roundoff
    again = simulate_coupling(crn_strategy(), kernel_spec(chain),
                              rng=Rng(seed=2), **kw)
    assert np.array_equal(est.mean_psi, again.mean_psi)
    assert np.all(est.se_psi <= 1e-6 * est.mean_psi)


def test_criterion_07_cheeger_sandwich():
    start = time.perf_counter()
    gen = np.random.Generator(np.random.PCG64(20_260_817))
    sizes = [3 + (i % 10) for i in range(50)]  # n ranges over 3..12
    for n in sizes:
        g = random_reversible_grid(n, gen)
        phi, _ = conductance_exact(g)
        gap = spectral_gap(g)
        assert phi * phi / 8.0 - 1e-12 <= gap <= phi + 1e-12

    p, q = 0.3, 0.2
    K = np.array([[1.0 - p, p], [q, 1.0 - q]])
    pi = np.array([q, p]) / (p + q)
    from mcmc_certify.spectral import GridChain
    two = GridChain(np.array([0.0, 1.0]), pi, K, reversible=True)
    assert spectral_gap(two) == pytest.approx(p + q, abs=1e-12)
    assert conductance_exact(two)[0] == pytest.approx(p + q, abs=1e-12)

    elapsed = time.perf_counter() - start
    print(f"criterion 7: 50 grids + 2-state case pass ({elapsed:.2f} s)")
    assert elapsed < 60.0


def test_criterion_08_isoperimetric_upper_bound():
    start = time.perf_counter()
    fn_half = 0.5 * math.erfc(0.5 / math.sqrt(2.0))  # standard normal cdf(-1/2)
    worst = 0.0
    for alpha in np.linspace(0.01, 0.99, 99):
        got = gaussian_norm_upper_iso(GaussianChain(p=2, alpha=float(alpha)))
        assert got >= alpha
        ratio = (1.0 - alpha * alpha) / (alpha * alpha)
        closed = 1.0 - (ratio / (64.0 * math.pi)) * math.exp(-ratio) \
            * fn_half * fn_half
        assert got == pytest.approx(closed, rel=1e-12)
        worst = max(worst, abs(got - closed))
    elapsed = time.perf_counter() - start
    print(f"criterion 8: max |pipeline - closed form| = {worst:.3e} "
          f"({elapsed * 1e3:.1f} ms)")
    assert elapsed < 1.0


def test_criterion_09_rwmh_lower_bounds():
    start = time.perf_counter()
    chain = RwmhChain(p=10, sigma=1.0)
    assert rwmh_norm_lower(chain) == 0.96875  # exact binary fraction

    # Monte Carlo of the move probability from the mode: proposals z are
    # standard normal and every move is accepted with prob exp(-|z|^2/2)
    target = rwmh_move_mass_at_origin(chain)
    assert target == 2.0 ** -5
    gen = np.random.Generator(np.random.PCG64(424_242))
    n, chunk = 1_000_000, 200_000
    tot = tot2 = 0.0
    for _ in range(n // chunk):
        z = gen.standard_normal((chunk, 10))
        acc = np.exp(-0.5 * np.einsum("ij,ij->i", z, z))
        tot += float(acc.sum())
        tot2 += float((acc * acc).sum())
    mean = tot / n
    se = math.sqrt(max(tot2 / n - mean * mean, 0.0) / n)
    print(f"criterion 9: mc move mass = {mean:.6f} (target {target}, "
          f"se {se:.2e})")
    assert abs(mean - target) <= 4.0 * se

    for p in (100, 1000, 10_000):
        v = sigma_star(p) ** 2
        assert 1.0 / p <= v <= 2.0 * math.log(p) / p
    elapsed = time.perf_counter() - start
    assert elapsed < 60.0


def test_criterion_10_mixing_time_scaling():
    start = time.perf_counter()
    ps = [10, 100, 1_000, 10_000]
    ts = [mixing_time(gaussian_tv_geometric(float(p),
                                            GaussianChain(p=p, alpha=0.5)),
                      0.01) for p in ps]
    slope = float(np.polyfit(np.log(ps), np.array(ts, dtype=float), 1)[0])
    target = 1.0 / (-math.log(0.5))
    elapsed = time.perf_counter() - start
    print(f"criterion 10: t = {ts}, slope = {slope:.5f}, "
          f"target = {target:.5f} ({elapsed * 1e3:.1f} ms)")
    assert abs(slope - target) <= 0.10 * target
    assert elapsed < 1.0


def test_criterion_11_conservativeness_ordering():
    start = time.perf_counter()
    chain = GaussianChain(p=10, alpha=0.5)
    cert = gaussian_dm_certificate(chain, 4.0)
    # mean drift 1 corresponds to mean norm at most sqrt(p) by Jensen
    dm = dm_geometric(1.0, cert)
    tv = gaussian_tv_geometric(math.sqrt(10.0), chain)
    ts = np.unique(np.logspace(0.0, 6.0, 200).astype(int))
    for t in ts:
        assert dm.evaluate(int(t)) >= tv.evaluate(int(t)) - 1e-15
    elapsed = time.perf_counter() - start
    print(f"criterion 11: ordering holds at {ts.size} times "
          f"({elapsed * 1e3:.1f} ms)")
    assert elapsed < 1.0


def test_criterion_12_l2_contraction_on_grids():
    start = time.perf_counter()
    g = discretize_imh(imh_chain(cosine_target()), 400)
    norm = operator_norm(g)
    gen = np.random.Generator(np.random.PCG64(271_828))
    for _ in range(20):
        mu = gen.dirichlet(np.ones(g.n))
        l2_0 = grid_l2_distance(g, mu)
        cur = mu
        for t in range(1, 11):
            cur = grid_evolve(g, cur, 1)
            l2_t = grid_l2_distance(g, cur)
            assert norm ** t * l2_0 - l2_t >= -1e-10
            assert l2_t - 2.0 * grid_tv_distance(g, cur) >= -1e-10
    elapsed = time.perf_counter() - start
    print(f"criterion 12: 20 starts x 10 steps pass ({elapsed:.2f} s)")
    assert elapsed < 30.0


def test_criterion_13_end_to_end_determinism(tmp_path):
    config = CONFIG_DIR / "gaussian_p10_certificate.json"
    dirs = (tmp_path / "first", tmp_path / "second")
    for d in dirs:
        assert cli.main(["run", str(config), "--out", str(d)]) == 0
    names = sorted(p.name for p in dirs[0].iterdir())
    assert names == sorted(p.name for p in dirs[1].iterdir())
    csvs = [n for n in names if n.endswith(".csv")]
    assert csvs, "the reproduction config should emit CSV curves"
    for name in csvs:
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
    # the JSON report matches too, apart from the wall-time stamp
    docs = [json.loads((d / "report.json").read_text()) for d in dirs]
    for doc in docs:
        doc["provenance"].pop("wall_time_s")
    assert docs[0] == docs[1]
    print(f"criterion 13: {len(csvs)} CSV files byte-identical")
