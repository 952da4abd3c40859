"""The L2 engine: operator norms, spectral gaps, conductance, grid oracles.

The continuous chains are certified by sandwiching: analytic upper bounds
(Doeblin, isoperimetric/Cheeger pipeline) against analytic lower bounds
(Rayleigh quotients, set flows, lazy points), with an exact finite-state
discretization as the referee for 1-d kernels. Grid quantities are honest
linear algebra: norms by deflated power iteration, conductance by subset
enumeration.

Two numbers that are easy to conflate and deliberately kept apart:
``operator_norm`` is the largest singular value of the Markov operator on
mean-zero functions (the L2 convergence rate for reversible chains), while
``spectral_gap`` is 1 minus the largest *signed* eigenvalue. They add up to
1 only when the kernel is positive semi-definite, which is checked, not
assumed.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .chains import GaussianChain, ImhChain, RwmhChain, imh_doeblin_epsilon
from .errors import ConvergenceError, McmcCertifyError
from .numerics import (DEFAULT_TOL, Interval, Tolerance, find_root,
                       integrate, minimize_scalar, normal_cdf, normal_pdf)

ENUMERATION_LIMIT = 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class GridChain:
    """Finite-state stand-in for a 1-d kernel: points, weights, row-stochastic K.

    weights is the discretized stationary law; ``reversible`` is a claim
    that is validated on construction (detailed balance to 1e-8 relative,
    with an absolute floor of 1e-15 so zero-flow pairs pass).
    """

    points: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray
    reversible: bool

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        k = np.asarray(self.matrix, dtype=float)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "matrix", k)
        n = pts.size
        if pts.ndim != 1 or n < 2:
            raise ValueError("points must be a 1-d array with n >= 2")
        if w.shape != (n,) or k.shape != (n, n):
            raise ValueError("weights must be (n,) and matrix (n, n)")
        if np.any(w <= 0.0):
            raise ValueError("weights must be strictly positive")
        if abs(float(w.sum()) - 1.0) > 1e-10:
            raise ValueError("weights must sum to 1 within 1e-10")
        if np.any(k < 0.0):
            raise ValueError("matrix entries must be nonnegative")
        rows = k.sum(axis=1)
        if np.max(np.abs(rows - 1.0)) > 1e-10:
            raise ValueError("matrix rows must sum to 1 within 1e-10")
        if self.reversible:
            flow = w[:, None] * k
            asym = np.abs(flow - flow.T)
            allowance = 1e-8 * (flow + flow.T) + 1e-15
            if np.any(asym > allowance):
                i, j = np.unravel_index(int(np.argmax(asym - allowance)),
                                        asym.shape)
                raise McmcCertifyError(
                    "detailed balance fails at states "
                    f"({i},{j}): {flow[i, j]!r} vs {flow[j, i]!r}")

    @property
    def n(self) -> int:
        return self.points.size


@dataclass(frozen=True)
class NormBracket:
    """Two-sided enclosure of an operator norm, with method provenance."""

    lower: float
    upper: float
    provenance: tuple[str, ...]

    def __post_init__(self):
        if not 0.0 <= self.lower <= 1.0 or not 0.0 <= self.upper <= 1.0:
            raise ValueError("bracket endpoints must lie in [0, 1]")
        if self.lower > self.upper:
            raise ValueError("bracket is empty: lower exceeds upper")


# ---------------------------------------------------------------------------
# discretization oracles
# ---------------------------------------------------------------------------

def discretize_imh(chain: ImhChain, n: int) -> GridChain:
    """Midpoint-grid discretization of the IMH kernel on [0,1].

    Off-diagonal K_ij = a_s(x_i, x_j)/n; the diagonal absorbs whatever the
    row is missing (rejection atom plus the cell's own acceptance), making
    rows sum to 1 by construction. Detailed balance is inherited exactly:
    the off-diagonal flow is min(s_i, s_j)/(n * sum s).
    """
    if n < 2:
        raise ValueError("need at least 2 grid points")
    x = (np.arange(n) + 0.5) / n
    s = np.asarray(chain.target(x), dtype=float)
    k = np.minimum(1.0, s[None, :] / s[:, None]) / n
    np.fill_diagonal(k, 0.0)
    np.fill_diagonal(k, 1.0 - k.sum(axis=1))
    return GridChain(points=x, weights=s / s.sum(), matrix=k,
                     reversible=True)


def discretize_gaussian1d(chain: GaussianChain, n: int) -> GridChain:
    """Gauss-Hermite discretization of the 1-d Gaussian chain.

    Builds the symmetric flow S_ij = w_i w_j k(x_i,x_j)/phi(x_j) (symmetric
    because the chain is reversible with respect to phi), then reads the
    grid chain off its row sums: K = S/rowsums, weights = rowsums/total.
    This keeps detailed balance exact by construction instead of hoping
    row renormalization preserves it.
    """
    if chain.p != 1:
        raise ValueError("the 1-d oracle needs p = 1")
    if n < 2:
        raise ValueError("need at least 2 grid points")
    nodes, wh = np.polynomial.hermite.hermgauss(n)
    x = math.sqrt(2.0) * nodes
    w = wh / math.sqrt(math.pi)
    a = chain.alpha
    if a == 0.0:
        weights = w / w.sum()
        k = np.tile(weights, (n, 1))
        k = k / k.sum(axis=1, keepdims=True)
        return GridChain(points=x, weights=weights, matrix=k,
                         reversible=True)
    s2 = 1.0 - a * a
    logw = np.log(w)
    # log of w_i w_j k(x_i,x_j)/phi(x_j), assembled to dodge underflow
    d = x[None, :] - a * x[:, None]
    logs = (logw[:, None] + logw[None, :]
            - 0.5 * math.log(2.0 * math.pi * s2) - d * d / (2.0 * s2)
            + 0.5 * math.log(2.0 * math.pi) + x[None, :] ** 2 / 2.0)
    s_flow = np.exp(logs)
    s_flow = 0.5 * (s_flow + s_flow.T)
    rows = s_flow.sum(axis=1)
    k = s_flow / rows[:, None]
    return GridChain(points=x, weights=rows / rows.sum(), matrix=k,
                     reversible=True)


def discretize_rwmh1d(chain: RwmhChain, n: int, span: float = 8.0
                      ) -> GridChain:
    """Midpoint-grid discretization of 1-d RWMH on [-span/2, span/2].

    Off-diagonal K_ij = h * proposal density * acceptance; the diagonal
    absorbs the remainder. A grid too coarse for sigma (cell width above
    about sigma/2) can push a diagonal negative, which is reported rather
    than clipped, since clipping would silently break the oracle.
    """
    if chain.p != 1:
        raise ValueError("the 1-d oracle needs p = 1")
    if n < 2:
        raise ValueError("need at least 2 grid points")
    if span <= 0.0:
        raise ValueError("span must be positive")
    h = span / n
    x = (np.arange(n) + 0.5) * h - span / 2.0
    sig = chain.sigma
    d = x[None, :] - x[:, None]
    prop = np.exp(-d * d / (2.0 * sig * sig)) / (sig * math.sqrt(2.0 * math.pi))
    acc = np.minimum(1.0, np.exp((x[:, None] ** 2 - x[None, :] ** 2) / 2.0))
    k = h * prop * acc
    np.fill_diagonal(k, 0.0)
    diag = 1.0 - k.sum(axis=1)
    if np.any(diag < 0.0):
        raise McmcCertifyError(
            "grid too coarse for this sigma: off-diagonal mass exceeds 1 "
            f"(min diagonal {float(diag.min())!r}); increase n or shrink span")
    np.fill_diagonal(k, diag)
    phi = np.exp(-x * x / 2.0)
    return GridChain(points=x, weights=phi / phi.sum(), matrix=k,
                     reversible=True)


# ---------------------------------------------------------------------------
# exact grid quantities
# ---------------------------------------------------------------------------

def _symmetrized(grid: GridChain):
    """A = D^(1/2) K D^(-1/2) and the deflation direction u = sqrt(pi)."""
    sq = np.sqrt(grid.weights)
    a = sq[:, None] * grid.matrix / sq[None, :]
    return a, sq


def _power_top(apply_op, n: int, tol: float, max_iter: int) -> float:
    """Largest eigenvalue of a PSD operator by power iteration.

    The start vector comes from a fixed internal seed so results are
    reproducible; convergence is on the Rayleigh quotient.
    """
    gen = np.random.Generator(np.random.PCG64(20_000_003))
    v = gen.standard_normal(n)
    nv = float(np.linalg.norm(v))
    v /= nv
    r_prev = math.inf
    for it in range(max_iter):
        w = apply_op(v)
        r = float(v @ w)
        nw = float(np.linalg.norm(w))
        if nw <= 1e-300:
            return 0.0
        v = w / nw
        if it >= 5 and abs(r - r_prev) <= tol * max(1.0, abs(r)):
            return max(r, 0.0)
        r_prev = r
    raise ConvergenceError(
        f"power iteration did not settle in {max_iter} steps")


def operator_norm(grid: GridChain, tol: float = 1e-10,
                  max_iter: int = 200_000) -> float:
    """Largest singular value of the Markov operator on mean-zero L2(pi).

    Works on M = A - u u^T with A the pi-symmetrized matrix and u = sqrt(pi)
    (the stationary direction, a left and right eigenvector of A for
    eigenvalue 1); power iteration runs on M^T M.
    """
    a, u = _symmetrized(grid)

    def mtm(v):
        w = a @ v - u * float(u @ v)
        return a.T @ w - u * float(u @ w)

    lam = _power_top(mtm, grid.n, tol, max_iter)
    return min(1.0, math.sqrt(max(lam, 0.0)))


def spectral_gap(grid: GridChain, tol: float = 1e-12,
                 max_iter: int = 200_000) -> float:
    """1 minus the largest signed eigenvalue on mean-zero L2(pi).

    Reversible grids only (the quantity is a Rayleigh-quotient supremum, so
    the matrix must be symmetrizable). Power iteration runs on the shifted
    deflated operator (A+A^T)/2 + I - 2 u u^T, which is PSD with top
    eigenvalue lambda_max + 1.
    """
    if not grid.reversible:
        raise McmcCertifyError("the spectral gap needs a reversible grid")
    a, u = _symmetrized(grid)
    a = 0.5 * (a + a.T)

    def shifted(v):
        v = v - u * float(u @ v)
        return a @ v + v - 2.0 * u * float(u @ v)

    top = _power_top(shifted, grid.n, tol, max_iter)
    gap = 2.0 - top
    return min(2.0, max(0.0, gap))


def conductance_exact(grid: GridChain):
    """Minimize the normalized flow phi(A) over all nontrivial subsets.

    phi(A) = sum_{i in A, j not in A} pi_i K_ij / (pi(A) pi(A^c)).
    Exhaustive enumeration, so n <= 24; reversible chains get the
    complement symmetry phi(A) = phi(A^c), halving the subset space to
    those containing state 0. Returns (phi, argmin set of state indices).
    """
    n = grid.n
    if n > ENUMERATION_LIMIT:
        raise ValueError(
            f"subset enumeration is limited to n <= {ENUMERATION_LIMIT}")
    flow = grid.weights[:, None] * grid.matrix
    pi = grid.weights
    bit_cols = np.arange(n, dtype=np.int64)

    if grid.reversible:
        # subsets containing state 0, full set excluded
        total = (1 << (n - 1)) - 1
        mask_of = lambda m: (m << 1) | 1  # noqa: E731 - tiny mask map
    else:
        total = (1 << n) - 2
        mask_of = lambda m: m + 1  # noqa: E731

    best_phi = math.inf
    best_mask = 0
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        masks = mask_of(np.arange(start, stop, dtype=np.int64))
        bits = ((masks[:, None] >> bit_cols) & 1).astype(float)
        pa = bits @ pi
        out_flow = ((bits @ flow) * (1.0 - bits)).sum(axis=1)
        phi = out_flow / (pa * (1.0 - pa))
        k = int(np.argmin(phi))
        if phi[k] < best_phi:
            best_phi = float(phi[k])
            best_mask = int(masks[k])
    subset = frozenset(i for i in range(n) if (best_mask >> i) & 1)
    return best_phi, subset


def grid_evolve(grid: GridChain, mu: np.ndarray, t: int) -> np.ndarray:
    """Push a distribution t steps through the grid kernel: mu K^t."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (grid.n,):
        raise ValueError("mu must be a length-n probability vector")
    if np.any(mu < 0.0) or abs(float(mu.sum()) - 1.0) > 1e-8:
        raise ValueError("mu must be a probability vector")
    if t < 0:
        raise ValueError("time index must be nonnegative")
    out = mu.copy()
    for _ in range(t):
        out = out @ grid.matrix
    return out


def grid_l2_distance(grid: GridChain, mu: np.ndarray) -> float:
    """L2(pi) distance of mu from stationarity: |mu/pi - 1| in L2(pi)."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (grid.n,):
        raise ValueError("mu must be a length-n vector")
    ratio = mu / grid.weights - 1.0
    return math.sqrt(float(grid.weights @ (ratio * ratio)))


def grid_tv_distance(grid: GridChain, mu: np.ndarray) -> float:
    """Total variation distance of mu from the grid stationary law."""
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (grid.n,):
        raise ValueError("mu must be a length-n vector")
    return 0.5 * float(np.abs(mu - grid.weights).sum())


# ---------------------------------------------------------------------------
# analytic upper bounds
# ---------------------------------------------------------------------------

def cheeger_bracket(phi: float):
    """Spectral-gap enclosure from conductance: (phi^2/8, phi)."""
    if phi < 0.0:
        raise ValueError("conductance must be nonnegative")
    return phi * phi / 8.0, phi


def doeblin_norm_upper(eps: float) -> float:
    """Operator-norm bound 1 - eps from a uniform minorization by pi."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    return 1.0 - eps


def iso_kappa(delta: float, sigma: float) -> float:
    """Isoperimetric constant 4 (delta/sigma) f_N(delta/sigma).

    The Gaussian three-set inequality's kappa at separation delta and
    scale sigma; maximal at delta/sigma = 1.
    """
    if delta <= 0.0 or sigma <= 0.0:
        raise ValueError("delta and sigma must be positive")
    u = delta / sigma
    return 4.0 * u * normal_pdf(u)


def isogap_conductance_lower(eps: float, kappa: float, a: float) -> float:
    """Conductance lower bound eps*min{(1-a)/2, a^2 kappa/4}.

    eps is the close-coupling constant (rows within delta overlap by at
    least eps), kappa the isoperimetric constant, a the mass split knob.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if kappa <= 0.0:
        raise ValueError("kappa must be positive")
    if not 0.0 < a < 1.0:
        raise ValueError("a must lie in (0, 1)")
    return eps * min((1.0 - a) / 2.0, a * a * kappa / 4.0)


def gaussian_norm_upper_iso(chain: GaussianChain) -> float:
    """Isoperimetric operator-norm upper bound for the Gaussian chain.

    Pipeline with the standard choices a = 1/2 and delta = sqrt(1-a^2)/a:
    close-coupling eps = 2 F_N(-1/2), kappa from iso_kappa at sigma = 1,
    conductance lower bound, Cheeger, then norm = 1 - gap (the kernel is
    PSD). Collapses to the closed form

        1 - (1-a^2)/(64 pi a^2) exp(-(1-a^2)/a^2) F_N(-1/2)^2,

    which the tests cross-check to 1e-12 relative. Dimension-free; weak
    (the subtracted mass underflows to 0 for alpha below about 0.04, where
    the bound degenerates to 1), but valid for every alpha, and 1 - bound
    stays bounded away from 0 as alpha -> 1.
    """
    a = chain.alpha
    if a == 0.0:
        return 0.0
    delta = math.sqrt(1.0 - a * a) / a
    eps = 2.0 * normal_cdf(-0.5)
    kappa = iso_kappa(delta, 1.0)
    if kappa == 0.0:
        # exp(-delta^2/2) underflows for alpha below about 0.026; the
        # bound is the degenerate 1, not an invalid input
        return 1.0
    phi_lower = isogap_conductance_lower(eps, kappa, 0.5)
    gap_lower, _ = cheeger_bracket(phi_lower)
    return 1.0 - gap_lower


def gaussian_norm_upper_iso_opt(chain: GaussianChain,
                                delta_domain: Interval = Interval(1e-3, 50.0),
                                ):
    """The same pipeline with (a, delta) optimized instead of fixed.

    For each delta the best a solves (1-a)/2 = a^2 kappa/4 (the min's
    crossover), in closed form a = 2/(1 + sqrt(1+2 kappa)); the remaining
    1-d search over delta uses minimize_scalar. Returns
    (upper, a_star, delta_star). Never worse than the fixed-choice bound
    on the searched domain.
    """
    alpha = chain.alpha
    if alpha == 0.0:
        return 0.0, 0.5, 1.0
    sn = math.sqrt(1.0 - alpha * alpha)

    def upper_at(delta: float) -> float:
        eps = 2.0 * normal_cdf(-alpha * delta / (2.0 * sn))
        kappa = iso_kappa(delta, 1.0)
        a = 2.0 / (1.0 + math.sqrt(1.0 + 2.0 * kappa))
        # at the crossover both terms of the min agree; written directly
        # because a rounds to 1.0 once kappa underflows the sqrt
        phi = eps * (1.0 - a) / 2.0
        return 1.0 - phi * phi / 8.0

    delta_star, val = minimize_scalar(upper_at, delta_domain, DEFAULT_TOL)
    kappa = iso_kappa(delta_star, 1.0)
    a_star = 2.0 / (1.0 + math.sqrt(1.0 + 2.0 * kappa))
    return val, a_star, delta_star


# ---------------------------------------------------------------------------
# analytic lower bounds
# ---------------------------------------------------------------------------

def rayleigh_lower(grid: GridChain, f) -> float:
    """Signed Rayleigh quotient <f, Kf>/|f|^2 on mean-zero L2(pi).

    f is centered first; the result is a lower bound on the operator norm
    through max(quotient, 0) (and on |quotient| for reversible grids).
    Constant f has no quotient and is an error.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (grid.n,):
        raise ValueError("f must be a length-n array")
    pi = grid.weights
    fbar = f - float(pi @ f)
    den = float(pi @ (fbar * fbar))
    if float(np.ptp(f)) == 0.0 or den <= 0.0:
        raise ValueError("f is constant on the grid; the quotient is empty")
    num = float(pi @ (fbar * (grid.matrix @ fbar)))
    return num / den


def set_lower(grid: GridChain, subset) -> float:
    """Operator-norm lower bound 1 - phi(A) from one subset's flow.

    May be negative (a vacuous but valid bound). subset is a boolean mask
    or an iterable of state indices; it must be nonempty and proper.
    """
    mask = np.zeros(grid.n, dtype=bool)
    subset = np.asarray(list(subset) if not isinstance(subset, np.ndarray)
                        else subset)
    if subset.dtype == bool:
        if subset.shape != (grid.n,):
            raise ValueError("boolean mask must have length n")
        mask = subset.copy()
    else:
        mask[np.asarray(subset, dtype=int)] = True
    if not mask.any() or mask.all():
        raise ValueError("subset must be nonempty and proper")
    pi = grid.weights
    pa = float(pi[mask].sum())
    out_flow = float((pi[mask, None] * grid.matrix[mask][:, ~mask]).sum())
    phi = out_flow / (pa * (1.0 - pa))
    return 1.0 - phi


def lazy_lower(move_mass: float, mass_a: float) -> float:
    """Operator-norm lower bound 1 - move_mass/(1 - mass_a).

    move_mass bounds K(x, {x}^c) on a set A of stationary mass mass_a: a
    chain that rarely leaves A's points cannot mix fast.
    """
    if not 0.0 <= move_mass <= 1.0:
        raise ValueError("move_mass must lie in [0, 1]")
    if not 0.0 < mass_a < 1.0:
        raise ValueError("mass_a must lie in (0, 1)")
    return 1.0 - move_mass / (1.0 - mass_a)


def rwmh_norm_lower(chain: RwmhChain) -> float:
    """RWMH operator-norm lower bound 1 - min{sigma^2/2, (sigma^2+1)^(-p/2)}."""
    s2 = chain.sigma * chain.sigma
    return max(0.0, 1.0 - min(s2 / 2.0, (s2 + 1.0) ** (-chain.p / 2.0)))


def sigma_star(p: int) -> float:
    """Proposal scale equalizing the two RWMH lower-bound terms.

    Solves v/2 = (v+1)^(-p/2) for v = sigma^2 on (1e-12, 10) by bisection
    and returns sigma = sqrt(v). This is where the lower bound
    1 - min{v/2, (v+1)^(-p/2)} is smallest, i.e. the scale at which the
    bound is least damning.
    """
    if p < 1:
        raise ValueError("dimension p must be a positive integer")

    def g(v: float) -> float:
        return v / 2.0 - (v + 1.0) ** (-p / 2.0)

    root = find_root(g, Interval(1e-12, 10.0),
                     Tolerance(abs_tol=1e-14, rel_tol=1e-13,
                               max_iter=10_000))
    return math.sqrt(root)


def asymptotic_variance_factor(gap: float) -> float:
    """(2 - gap)/gap: the worst-case asymptotic-variance inflation."""
    if not 0.0 < gap <= 2.0:
        raise ValueError("gap must lie in (0, 2]")
    return (2.0 - gap) / gap


# ---------------------------------------------------------------------------
# assembled brackets
# ---------------------------------------------------------------------------

def norm_bracket_imh(chain: ImhChain, width: float = 1e-4) -> NormBracket:
    """Two-sided norm enclosure for IMH without any grid.

    Upper: Doeblin 1 - 1/M_s. Lower: lazy-point bound on a small interval
    around the mode of s, where the move probability is essentially 1/M_s.
    The two meet as width -> 0; at the default width they agree to about
    M_s * width.
    """
    eps = imh_doeblin_epsilon(chain)
    upper = doeblin_norm_upper(eps)

    s = chain.target
    probe = np.linspace(0.0, 1.0, 10_001)
    sv = np.asarray(s(probe), dtype=float)
    k = int(np.argmax(sv))
    lo = probe[max(k - 1, 0)]
    hi = probe[min(k + 1, probe.size - 1)]
    x_star, _ = minimize_scalar(lambda u: -float(s(u)), Interval(lo, hi),
                                Tolerance(abs_tol=1e-12, rel_tol=0.0,
                                          max_iter=200))
    a_lo = max(0.0, x_star - width / 2.0)
    a_hi = min(1.0, x_star + width / 2.0)
    sub = np.linspace(a_lo, a_hi, 101)
    s_min = float(np.min(np.asarray(s(sub), dtype=float)))
    # sup over A of K(x, {x}^c) is attained where s is smallest on A
    move_sup = integrate(lambda u: min(1.0, float(s(u)) / s_min),
                         Interval(0.0, 1.0),
                         Tolerance(abs_tol=1e-10, rel_tol=1e-9))
    mass_a = integrate(lambda u: float(s(u)), Interval(a_lo, a_hi),
                       Tolerance(abs_tol=1e-12, rel_tol=1e-9))
    lower = max(0.0, lazy_lower(min(1.0, move_sup), mass_a))
    return NormBracket(lower=lower, upper=upper,
                       provenance=("lazy_lower at the mode of s",
                                   "doeblin_norm_upper"))


def norm_bracket_gaussian(chain: GaussianChain, n: int = 80) -> NormBracket:
    """Norm enclosure for the Gaussian chain (any p; the norm is p-free).

    Lower: Rayleigh quotient with f(x) = x on the 1-d Gauss-Hermite grid
    at the same alpha (linear f is the optimal direction). Upper: the
    isoperimetric pipeline bound.
    """
    upper = gaussian_norm_upper_iso(chain)
    if chain.alpha == 0.0:
        return NormBracket(lower=0.0, upper=0.0,
                           provenance=("exact sampler", "exact sampler"))
    oracle = discretize_gaussian1d(GaussianChain(p=1, alpha=chain.alpha), n)
    lower = max(0.0, rayleigh_lower(oracle, oracle.points))
    return NormBracket(lower=min(lower, upper), upper=upper,
                       provenance=("rayleigh_lower with f(x)=x on the 1-d "
                                   "grid", "gaussian_norm_upper_iso"))


# ---------------------------------------------------------------------------
# CSV round trip
# ---------------------------------------------------------------------------

def write_grid_chain(prefix, grid: GridChain) -> None:
    """Export a grid chain as the CSV triplet prefix_{points,weights,matrix}.csv."""
    prefix = str(prefix)
    with open(prefix + "_points.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        for v in grid.points:
            writer.writerow([format(v, ".17g")])
    with open(prefix + "_weights.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        for v in grid.weights:
            writer.writerow([format(v, ".17g")])
    with open(prefix + "_matrix.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in grid.matrix:
            writer.writerow([format(v, ".17g") for v in row])


def read_grid_chain(prefix, reversible: bool) -> GridChain:
    """Load a CSV triplet written by write_grid_chain; revalidates everything."""
    prefix = str(prefix)

    def load(path):
        with open(path, newline="") as fh:
            return [[float(v) for v in row] for row in csv.reader(fh) if row]

    points = np.array([r[0] for r in load(prefix + "_points.csv")])
    weights = np.array([r[0] for r in load(prefix + "_weights.csv")])
    matrix = np.array(load(prefix + "_matrix.csv"))
    return GridChain(points=points, weights=weights, matrix=matrix,
                     reversible=reversible)
