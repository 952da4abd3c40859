"""Grid oracles: norms, gaps, conductance, and norm brackets."""

import itertools
import math

import numpy as np
import pytest

from mcmc_certify.chains import (GaussianChain, RwmhChain, cosine_target,
                                 imh_chain, uniform_target)
from mcmc_certify.errors import McmcCertifyError
from mcmc_certify.spectral import (GridChain, NormBracket,
                                   asymptotic_variance_factor,
                                   cheeger_bracket, conductance_exact,
                                   discretize_gaussian1d, discretize_imh,
                                   discretize_rwmh1d, doeblin_norm_upper,
                                   gaussian_norm_upper_iso,
                                   gaussian_norm_upper_iso_opt, grid_evolve,
                                   grid_l2_distance, grid_tv_distance,
                                   iso_kappa, lazy_lower, norm_bracket_gaussian,
                                   norm_bracket_imh, operator_norm,
                                   rayleigh_lower, read_grid_chain,
                                   rwmh_norm_lower, set_lower, sigma_star,
                                   spectral_gap, write_grid_chain)
from tests.conftest import random_reversible_grid

# mpmath references (dps=40): the closed-form isoperimetric norm bound
# 1 - (1-a^2)/(64*pi*a^2) * exp(-(1-a^2)/a^2) * F_N(-1/2)^2 at alpha = a
ISO_REFS = {
    0.3: 0.99999980551536498,
    0.5: 0.99992928297471011,
    0.9: 0.9999121618436486,
}

# bisection references for sigma_star(p)^2 solving v/2 = (v+1)^(-p/2)
SIGMA_STAR_SQ_REFS = {
    10: 0.38809350888967358,
    100: 0.069500216390430591,
    1000: 0.010545603797356547,
    10000: 0.001447288450144592,
}


def _norm_oracle(grid):
    # top singular value of the pi-symmetrized kernel off the stationary
    # direction, straight from LAPACK
    d = np.sqrt(grid.weights)
    a = (d[:, None] * grid.matrix) / d[None, :]
    m = a - np.outer(d, d)
    return min(1.0, float(np.linalg.svd(m, compute_uv=False)[0]))


def _gap_oracle(grid):
    d = np.sqrt(grid.weights)
    a = (d[:, None] * grid.matrix) / d[None, :]
    eigs = np.sort(np.linalg.eigvalsh(0.5 * (a + a.T)))
    return 1.0 - eigs[-2]


def _conductance_oracle(grid):
    pi = grid.weights
    flow = pi[:, None] * grid.matrix
    best = math.inf
    for size in range(1, grid.n):
        for subset in itertools.combinations(range(grid.n), size):
            mask = np.zeros(grid.n, dtype=bool)
            mask[list(subset)] = True
            q = flow[mask][:, ~mask].sum()
            best = min(best, q / (pi[mask].sum() * pi[~mask].sum()))
    return best


# ---------------------------------------------------------------------------
# GridChain construction and validation
# ---------------------------------------------------------------------------

def test_grid_chain_validation():
    pts = np.array([0.0, 1.0])
    pi = np.array([0.5, 0.5])
    K = np.array([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ValueError):
        GridChain(pts, np.array([0.9, 0.2]), K, True)  # weights not a law
    with pytest.raises(ValueError):
        GridChain(pts, np.array([1.0, 0.0]), K, True)  # zero weight
    with pytest.raises(ValueError):
        GridChain(pts, pi, np.array([[0.5, 0.6], [0.5, 0.5]]), True)
    with pytest.raises(ValueError):
        GridChain(pts, pi, np.array([[1.1, -0.1], [0.5, 0.5]]), True)
    bad = np.array([[0.9, 0.1], [0.4, 0.6]])
    with pytest.raises(McmcCertifyError, match="detailed balance"):
        GridChain(pts, pi, bad, True)
    # the same matrix is fine once we stop claiming reversibility
    GridChain(pts, np.array([0.8, 0.2]), bad, False)


def test_norm_bracket_validation():
    with pytest.raises(ValueError):
        NormBracket(0.5, 0.4, ("a", "b"))
    with pytest.raises(ValueError):
        NormBracket(-0.1, 0.4, ("a", "b"))
    nb = NormBracket(0.2, 0.4, ("a", "b"))
    assert nb.lower <= nb.upper


# ---------------------------------------------------------------------------
# two-state chain, where everything is a pencil-and-paper formula
# ---------------------------------------------------------------------------

def test_two_state_chain_closed_forms():
    p, q = 0.3, 0.2
    K = np.array([[1.0 - p, p], [q, 1.0 - q]])
    pi = np.array([q, p]) / (p + q)
    g = GridChain(np.array([0.0, 1.0]), pi, K, reversible=True)
    # second eigenvalue is 1-p-q; conductance (product-denominator) is p+q
    assert operator_norm(g) == pytest.approx(abs(1.0 - p - q), abs=1e-12)
    assert spectral_gap(g) == pytest.approx(p + q, abs=1e-12)
    phi, aset = conductance_exact(g)
    assert phi == pytest.approx(p + q, abs=1e-12)
    assert aset in (frozenset({0}), frozenset({1}))


# ---------------------------------------------------------------------------
# discretizers
# ---------------------------------------------------------------------------

def test_discretize_imh_uniform_is_rank_one():
    g = discretize_imh(imh_chain(uniform_target()), 50)
    assert operator_norm(g) <= 1e-8
    assert np.allclose(g.matrix, 1.0 / 50, atol=1e-15)


def test_discretize_imh_cosine_matches_doeblin_norm():
    g = discretize_imh(imh_chain(cosine_target()), 400)
    # the true norm is 1 - 1/sup s = 1/3; the grid picks it up to O(1/n)
    assert operator_norm(g) == pytest.approx(1.0 / 3.0, abs=1e-3)


def test_discretize_gaussian_norm_is_alpha():
    for alpha in (0.3, 0.9):
        g = discretize_gaussian1d(GaussianChain(p=1, alpha=alpha), 80)
        assert operator_norm(g, tol=1e-12) == pytest.approx(alpha, abs=1e-9)
        assert spectral_gap(g) == pytest.approx(1.0 - alpha, abs=1e-8)


def test_discretize_gaussian_alpha_zero_is_exact_resampling():
    g = discretize_gaussian1d(GaussianChain(p=1, alpha=0.0), 40)
    assert np.allclose(g.matrix, g.weights[None, :], atol=1e-15)
    assert operator_norm(g) <= 1e-8


def test_discretize_rwmh_consistent_with_analytic_lower():
    chain = RwmhChain(p=1, sigma=0.2)
    g = discretize_rwmh1d(chain, 400)
    norm = operator_norm(g, tol=1e-8)
    assert rwmh_norm_lower(chain) - 0.01 <= norm <= 1.0


def test_discretize_rwmh_input_validation():
    with pytest.raises(ValueError):
        discretize_rwmh1d(RwmhChain(p=2, sigma=1.0), 50)  # needs p = 1
    with pytest.raises(ValueError):
        discretize_rwmh1d(RwmhChain(p=1, sigma=1.0), 1)
    with pytest.raises(ValueError):
        discretize_rwmh1d(RwmhChain(p=1, sigma=1.0), 50, span=0.0)


# ---------------------------------------------------------------------------
# power iteration against LAPACK oracles
# ---------------------------------------------------------------------------

def test_operator_norm_matches_svd_on_random_grids():
    gen = np.random.Generator(np.random.PCG64(5150))
    for n in (2, 3, 5, 8, 12):
        g = random_reversible_grid(n, gen)
        assert operator_norm(g) == pytest.approx(_norm_oracle(g), abs=1e-9)


def test_spectral_gap_matches_eigh_on_random_grids():
    gen = np.random.Generator(np.random.PCG64(6021))
    for n in (2, 4, 7, 11):
        g = random_reversible_grid(n, gen)
        assert spectral_gap(g) == pytest.approx(_gap_oracle(g), abs=1e-9)


def test_operator_norm_handles_nonreversible_grids():
    # doubly stochastic but asymmetric: uniform pi, no detailed balance
    K = np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3], [0.3, 0.2, 0.5]])
    pi = np.full(3, 1.0 / 3.0)
    g = GridChain(np.arange(3.0), pi, K, reversible=False)
    assert operator_norm(g) == pytest.approx(_norm_oracle(g), abs=1e-10)
    with pytest.raises(McmcCertifyError):
        spectral_gap(g)


# ---------------------------------------------------------------------------
# conductance
# ---------------------------------------------------------------------------

def test_conductance_matches_brute_force():
    gen = np.random.Generator(np.random.PCG64(7777))
    for n in (2, 3, 5, 8):
        g = random_reversible_grid(n, gen)
        phi, aset = conductance_exact(g)
        assert phi == pytest.approx(_conductance_oracle(g), rel=1e-12)
        # the reported set must achieve the reported value
        mask = np.zeros(n, dtype=bool)
        mask[list(aset)] = True
        pi = g.weights
        q = (pi[:, None] * g.matrix)[mask][:, ~mask].sum()
        assert q / (pi[mask].sum() * pi[~mask].sum()) == pytest.approx(
            phi, rel=1e-12)


def test_conductance_reversible_halving_matches_full_enumeration():
    # the reversible scan only visits subsets containing state 0; flag the
    # same grid non-reversible and the full scan must agree
    gen = np.random.Generator(np.random.PCG64(8888))
    g = random_reversible_grid(7, gen)
    g_full = GridChain(g.points, g.weights, g.matrix, reversible=False)
    assert conductance_exact(g)[0] == pytest.approx(
        conductance_exact(g_full)[0], rel=1e-12)


def test_conductance_enumeration_limit():
    gen = np.random.Generator(np.random.PCG64(1))
    g = random_reversible_grid(25, gen)
    with pytest.raises(ValueError):
        conductance_exact(g)


def test_cheeger_bracket_encloses_gap():
    gen = np.random.Generator(np.random.PCG64(31415))
    for n in (3, 6, 10):
        g = random_reversible_grid(n, gen)
        phi, _ = conductance_exact(g)
        gap = spectral_gap(g)
        lo, hi = cheeger_bracket(phi)
        assert lo - 1e-12 <= gap <= hi + 1e-12


# ---------------------------------------------------------------------------
# distribution evolution
# ---------------------------------------------------------------------------

def test_grid_evolve_matches_matrix_power():
    gen = np.random.Generator(np.random.PCG64(99))
    g = random_reversible_grid(6, gen)
    mu = gen.dirichlet(np.ones(6))
    out = grid_evolve(g, mu, 4)
    expect = mu @ np.linalg.matrix_power(g.matrix, 4)
    assert np.allclose(out, expect, atol=1e-14)
    assert np.all(grid_evolve(g, mu, 0) == mu)


def test_grid_distances():
    gen = np.random.Generator(np.random.PCG64(123))
    g = random_reversible_grid(8, gen)
    assert grid_l2_distance(g, g.weights) == pytest.approx(0.0, abs=1e-14)
    assert grid_tv_distance(g, g.weights) == pytest.approx(0.0, abs=1e-14)
    for _ in range(10):
        mu = gen.dirichlet(np.ones(8))
        # Cauchy-Schwarz: 2*TV = sum pi |mu/pi - 1| <= L2(pi) distance
        assert 2.0 * grid_tv_distance(g, mu) <= grid_l2_distance(g, mu) + 1e-12


# ---------------------------------------------------------------------------
# analytic norm bounds
# ---------------------------------------------------------------------------

def test_doeblin_norm_upper():
    assert doeblin_norm_upper(1.0) == 0.0
    assert doeblin_norm_upper(2.0 / 3.0) == pytest.approx(1.0 / 3.0)
    with pytest.raises(ValueError):
        doeblin_norm_upper(0.0)


def test_iso_kappa_peaks_at_matched_scale():
    peak = iso_kappa(1.0, 1.0)
    assert peak == pytest.approx(4.0 * math.exp(-0.5) / math.sqrt(2 * math.pi),
                                 rel=1e-14)
    assert iso_kappa(0.8, 1.0) < peak
    assert iso_kappa(1.25, 1.0) < peak
    # kappa depends on delta/sigma only
    assert iso_kappa(2.0, 2.0) == pytest.approx(peak, rel=1e-14)


def test_gaussian_iso_bound_matches_closed_form():
    for alpha, ref in ISO_REFS.items():
        chain = GaussianChain(p=3, alpha=alpha)
        got = gaussian_norm_upper_iso(chain)
        assert got == pytest.approx(ref, rel=1e-12)
        assert got >= alpha  # it really is an upper bound on the norm
    assert gaussian_norm_upper_iso(GaussianChain(p=2, alpha=0.0)) == 0.0


def test_gaussian_iso_opt_improves_on_fixed_choices():
    for alpha in (0.3, 0.5, 0.9):
        chain = GaussianChain(p=4, alpha=alpha)
        fixed = gaussian_norm_upper_iso(chain)
        upper, a_star, delta_star = gaussian_norm_upper_iso_opt(chain)
        assert upper <= fixed + 1e-15
        assert alpha <= upper <= 1.0
        assert 0.0 < a_star < 1.0
        assert delta_star > 0.0


def test_rayleigh_lower_is_a_valid_lower_bound():
    g = discretize_gaussian1d(GaussianChain(p=1, alpha=0.6), 60)
    lower = rayleigh_lower(g, g.points)
    assert lower == pytest.approx(0.6, abs=1e-10)
    assert lower <= operator_norm(g) + 1e-10
    with pytest.raises(ValueError):
        rayleigh_lower(g, np.ones(g.n))  # constant f centers to zero


def test_set_lower_is_a_valid_lower_bound():
    gen = np.random.Generator(np.random.PCG64(2718))
    for n in (4, 9):
        g = random_reversible_grid(n, gen)
        norm = operator_norm(g)
        for _ in range(5):
            mask = gen.random(n) < 0.5
            if not mask.any() or mask.all():
                continue
            assert set_lower(g, mask) <= norm + 1e-10
    with pytest.raises(ValueError):
        set_lower(g, np.zeros(n, dtype=bool))


def test_lazy_lower():
    assert lazy_lower(0.1, 0.5) == pytest.approx(0.8)
    with pytest.raises(ValueError):
        lazy_lower(-0.1, 0.5)
    with pytest.raises(ValueError):
        lazy_lower(0.1, 1.0)


def test_rwmh_norm_lower_closed_form():
    # p = 10, sigma = 1: move mass (sigma^2+1)^(-p/2) = 2^-5 wins the min
    assert rwmh_norm_lower(RwmhChain(p=10, sigma=1.0)) == 1.0 - 2.0 ** -5
    # small sigma: the sigma^2/2 branch wins
    assert rwmh_norm_lower(RwmhChain(p=2, sigma=0.1)) == pytest.approx(
        1.0 - 0.005, rel=1e-14)


def test_sigma_star_solves_the_crossover():
    for p, ref in SIGMA_STAR_SQ_REFS.items():
        v = sigma_star(p) ** 2
        assert v == pytest.approx(ref, rel=1e-10)
        assert abs(v / 2.0 - (v + 1.0) ** (-p / 2.0)) <= 1e-12
        if p >= 100:
            assert 1.0 / p <= v <= 2.0 * math.log(p) / p


def test_asymptotic_variance_factor():
    assert asymptotic_variance_factor(1.0) == 1.0
    assert asymptotic_variance_factor(0.5) == 3.0
    assert asymptotic_variance_factor(2.0) == 0.0
    with pytest.raises(ValueError):
        asymptotic_variance_factor(0.0)


# ---------------------------------------------------------------------------
# norm brackets
# ---------------------------------------------------------------------------

def test_norm_bracket_imh_cosine():
    nb = norm_bracket_imh(imh_chain(cosine_target()))
    assert nb.upper == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert nb.lower <= nb.upper
    assert nb.upper - nb.lower <= 1e-3
    # shrinking the lazy window tightens the lower edge
    tight = norm_bracket_imh(imh_chain(cosine_target()), width=1e-5)
    assert tight.lower >= nb.lower - 1e-12


def test_norm_bracket_gaussian():
    for alpha in (0.4, 0.8):
        nb = norm_bracket_gaussian(GaussianChain(p=7, alpha=alpha))
        # the Rayleigh lower edge can sit an ulp above alpha
        assert nb.lower <= alpha + 1e-12
        assert alpha <= nb.upper + 1e-12
        assert nb.lower >= alpha - 0.01
    nb0 = norm_bracket_gaussian(GaussianChain(p=3, alpha=0.0))
    assert nb0.lower == nb0.upper == 0.0


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------

def test_grid_chain_csv_round_trip(tmp_path):
    gen = np.random.Generator(np.random.PCG64(4242))
    g = random_reversible_grid(9, gen)
    prefix = tmp_path / "grid"
    write_grid_chain(prefix, g)
    back = read_grid_chain(prefix, reversible=True)
    # .17g round-trips doubles exactly
    assert np.array_equal(back.points, g.points)
    assert np.array_equal(back.weights, g.weights)
    assert np.array_equal(back.matrix, g.matrix)
    assert back.reversible
