"""Analytic convergence bounds: Doeblin, Wasserstein/one-shot, drift-minorization.

Everything here is a closed form or a 1-d quadrature/optimization; the Monte
Carlo evidence that these are genuine upper bounds lives in ``coupling``.
Conventions:

* TV-distance bounds are clamped to 1 on evaluation, never at construction,
  so the stored (c, rho) pair stays exact.
* the one-shot TV bound spends one time index on its maximal step, so the
  exponent at horizon t is t-1; asking for t = 0 is answered with the
  trivial bound 1 plus a RuntimeWarning rather than an error.
* mu-dependent scalars (mean norm under the initial law, mean drift value)
  are supplied by the caller; helpers below cover the two initial laws the
  toolkit actually uses (point masses and centered Gaussians).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .chains import GaussianChain
from .errors import CertificateError
from .numerics import DEFAULT_TOL, Interval, Tolerance, integrate, minimize_scalar

DISTANCES = ("TV", "W1", "L2")


@dataclass(frozen=True)
class GeometricBound:
    """A curve t -> c * rho^t in a named distance."""

    c: float
    rho: float
    distance: str

    def __post_init__(self):
        if not self.c >= 0.0:
            raise ValueError("prefactor c must be nonnegative")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rate rho must lie in [0, 1)")
        if self.distance not in DISTANCES:
            raise ValueError(f"distance must be one of {DISTANCES}")

    def evaluate(self, t: int) -> float:
        if t < 0:
            raise ValueError("time index must be nonnegative")
        v = self.c * self.rho ** t
        if self.distance == "TV":
            return min(1.0, v)
        return v


@dataclass(frozen=True)
class DriftCondition:
    """Kh <= lam*h + big_l for the drift function named by h_id."""

    h_id: str
    lam: float
    big_l: float

    def __post_init__(self):
        if not 0.0 <= self.lam < 1.0:
            raise ValueError("drift factor lam must lie in [0, 1)")
        if not self.big_l >= 0.0:
            raise ValueError("drift constant big_l must be nonnegative")


@dataclass(frozen=True)
class DriftMinorizationCertificate:
    """Drift condition plus a minorization on the sublevel set {h <= Delta}.

    The standing requirement delta_level > 2*big_l/(1-lam) is what makes the
    optimized rate land strictly below 1; violating it is a certificate
    error, not a value error, because the numbers may individually be fine.
    """

    drift: DriftCondition
    delta_level: float
    eps: float
    nu_id: str

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError("minorization mass eps must lie in (0, 1]")
        floor = 2.0 * self.drift.big_l / (1.0 - self.drift.lam)
        if not self.delta_level > floor:
            raise CertificateError(
                f"delta_level must exceed 2L/(1-lam) = {floor!r}; "
                f"got {self.delta_level!r}")


def doeblin_tv_bound(eps: float, t: int) -> float:
    """(1-eps)^t, the uniform-minorization TV rate."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    if t < 0:
        raise ValueError("time index must be nonnegative")
    return (1.0 - eps) ** t


def stationary_moment_bound(drift: DriftCondition) -> float:
    """Bound on the stationary mean of h: L/(1-lam)."""
    return drift.big_l / (1.0 - drift.lam)


def gaussian_w1_bound(mu_mean_norm: float, chain: GaussianChain,
                      t: int) -> float:
    """(mu_mean_norm + sqrt(p)) * alpha^t.

    The sqrt(p) stands in for the stationary mean norm, via the drift bound
    on the second moment; it is what keeps the bound closed-form.
    """
    if not mu_mean_norm >= 0.0:
        raise ValueError("mu_mean_norm must be nonnegative")
    if t < 0:
        raise ValueError("time index must be nonnegative")
    return (mu_mean_norm + math.sqrt(chain.p)) * chain.alpha ** t


def gaussian_one_shot_b(chain: GaussianChain) -> float:
    """Row-continuity constant: TV between rows <= b * distance.

    b = alpha / sqrt(2*pi*(1-alpha^2)); alpha = 0 gives identical rows, so
    any constant works and 0 is the sharp choice.
    """
    a = chain.alpha
    if a == 0.0:
        return 0.0
    return a / math.sqrt(2.0 * math.pi * (1.0 - a * a))


def gaussian_tv_bound(mu_mean_norm: float, chain: GaussianChain,
                      t: int) -> float:
    """One-shot TV bound min{1, b*(mu_mean_norm + sqrt(p))*alpha^(t-1)}.

    The maximal-coupling step consumes one time index, hence the t-1
    exponent; t = 0 has no step to spend and returns the trivial 1.
    """
    if not mu_mean_norm >= 0.0:
        raise ValueError("mu_mean_norm must be nonnegative")
    if t < 0:
        raise ValueError("time index must be nonnegative")
    if t == 0:
        warnings.warn("the one-shot TV bound needs at least one step; "
                      "returning the trivial bound 1 at t = 0",
                      RuntimeWarning, stacklevel=2)
        return 1.0
    b = gaussian_one_shot_b(chain)
    val = b * (mu_mean_norm + math.sqrt(chain.p)) * chain.alpha ** (t - 1)
    return min(1.0, val)


def rho_dm(r: float, cert: DriftMinorizationCertificate) -> float:
    """The drift-minorization rate at interpolation exponent r.

    max{(1-eps)^r (2L+1)^(1-r), (lam + (2L+1-lam)/(Delta+1))^(1-r)}; the
    first factor falls in r, the second rises, so the best r sits at their
    crossover. Values above 1 are legitimate for bad r.
    """
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    lam = cert.drift.lam
    big_l = cert.drift.big_l
    two_l1 = 2.0 * big_l + 1.0
    term1 = (1.0 - cert.eps) ** r * two_l1 ** (1.0 - r)
    base2 = lam + (two_l1 - lam) / (cert.delta_level + 1.0)
    term2 = base2 ** (1.0 - r)
    return max(term1, term2)


def optimize_rho(cert: DriftMinorizationCertificate,
                 tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """Minimize rho_dm over r in (1e-9, 1-1e-9).

    The certificate invariant guarantees the minimum is below 1; if the
    optimizer still lands at or above 1 the certificate's numbers are
    inconsistent and we say so instead of returning a useless rate.
    """
    r_star, rho_star = minimize_scalar(lambda r: rho_dm(r, cert),
                                       Interval(1e-9, 1.0 - 1e-9), tol)
    if not rho_star < 1.0:
        raise CertificateError(
            f"optimized rate is {rho_star!r} >= 1; the certificate's "
            "drift/minorization numbers are mutually inconsistent")
    return r_star, rho_star


def gaussian_minorization_epsilon(p: int, alpha: float,
                                  delta_level: float) -> float:
    """Mass of the inf-density minorization for the Gaussian chain.

    Reduces the p-dimensional integral of q(x') = inf over the small set of
    the transition density to the radial integral

        eps = S_{p-1} * int_0^inf u^{p-1} (2 pi (1-a^2))^{-p/2}
              * exp(-(u + a*sqrt(p*Delta))^2 / (2 (1-a^2))) du,

    S_{p-1} = 2 pi^{p/2} / Gamma(p/2), evaluated in log space so large p
    cannot overflow the u^{p-1} factor.
    """
    if p < 1:
        raise ValueError("dimension p must be a positive integer")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1) for a minorization")
    if not delta_level > 2.0:
        raise ValueError("delta_level must exceed 2 for the Gaussian chain")
    s2 = 1.0 - alpha * alpha
    m = alpha * math.sqrt(p * delta_level)
    log_c = -0.5 * p * math.log(2.0 * math.pi * s2)
    log_sphere = math.log(2.0) + 0.5 * p * math.log(math.pi) \
        - math.lgamma(0.5 * p)

    def integrand(u: float) -> float:
        if u <= 0.0:
            return 0.0
        shift = u + m
        lf = (p - 1) * math.log(u) + log_c - shift * shift / (2.0 * s2)
        if lf < -745.0:
            return 0.0
        return math.exp(lf)

    # mode of the radial density; the tail is sub-Gaussian with scale
    # sqrt(s2), so 45 scales past the mode is far below double underflow
    mode = 0.5 * (-m + math.sqrt(m * m + 4.0 * s2 * max(p - 1, 0)))
    upper = mode + 45.0 * math.sqrt(s2) + 5.0
    mass = integrate(integrand, Interval(0.0, upper),
                     Tolerance(abs_tol=1e-300, rel_tol=1e-11,
                               max_iter=200_000))
    eps = math.exp(log_sphere) * mass
    if not eps > 0.0:
        raise CertificateError(
            "minorization mass underflows double precision at these "
            f"parameters (p={p}, alpha={alpha}, delta_level={delta_level})")
    return min(eps, 1.0)


def dm_tv_bound(mu_h: float, cert: DriftMinorizationCertificate,
                t: int) -> float:
    """min{1, (mu_h + L/(1-lam) + 1) * rho_star^t} with the optimized rate."""
    if not mu_h >= 0.0:
        raise ValueError("mu_h must be nonnegative")
    if t < 0:
        raise ValueError("time index must be nonnegative")
    _, rho_star = optimize_rho(cert)
    c = mu_h + stationary_moment_bound(cert.drift) + 1.0
    return min(1.0, c * rho_star ** t)


def mixing_time(bound: GeometricBound, eps_tol: float):
    """First t with c*rho^t <= eps_tol: max{1, ceil((log c - log eps)/(-log rho))}.

    Returns a positive integer, or math.inf when the rate has degenerated
    to 1 in floating point (cannot happen for a validated GeometricBound,
    kept as a guard).
    """
    if not eps_tol > 0.0:
        raise ValueError("eps_tol must be positive")
    if bound.c <= eps_tol:
        return 1
    if bound.rho <= 0.0:
        return 1
    den = -math.log(bound.rho)
    if den == 0.0:
        return math.inf
    t = math.ceil((math.log(bound.c) - math.log(eps_tol)) / den)
    return max(1, t)


# ---------------------------------------------------------------------------
# certificate and curve builders for the three chain families
# ---------------------------------------------------------------------------

def gaussian_drift_condition(chain: GaussianChain) -> DriftCondition:
    """h(x) = |x|^2/p satisfies Kh <= alpha^2 h + (1 - alpha^2) exactly."""
    a2 = chain.alpha * chain.alpha
    return DriftCondition(h_id="norm_sq_over_p", lam=a2, big_l=1.0 - a2)


def gaussian_dm_certificate(chain: GaussianChain,
                            delta_level: float = 4.0
                            ) -> DriftMinorizationCertificate:
    """Drift + minorization certificate for the Gaussian chain at level Delta."""
    eps = gaussian_minorization_epsilon(chain.p, chain.alpha, delta_level)
    return DriftMinorizationCertificate(
        drift=gaussian_drift_condition(chain),
        delta_level=delta_level, eps=eps,
        nu_id="gaussian_radial_inf_density")


def optimize_rho_delta(chain: GaussianChain,
                       delta_domain: Interval = Interval(2.0 + 1e-6, 100.0),
                       ) -> tuple[float, float, float]:
    """Jointly minimize the drift-minorization rate over (r, Delta).

    Nested scalar minimization: the outer search moves Delta (which changes
    eps through the radial integral), the inner one re-optimizes r. Returns
    (delta_star, r_star, rho_star). Slower than optimize_rho by the cost of
    one quadrature per outer evaluation.
    """

    def rho_at(delta: float) -> float:
        cert = gaussian_dm_certificate(chain, delta)
        try:
            return optimize_rho(cert)[1]
        except CertificateError:
            # close to the drift floor the contraction term tends to 1 and
            # rho* can round to >= 1 in doubles; score such deltas as
            # infeasible instead of aborting the scan
            return 2.0

    delta_star, _ = minimize_scalar(
        rho_at, delta_domain, Tolerance(abs_tol=1e-6, rel_tol=1e-6,
                                        max_iter=10_000))
    cert = gaussian_dm_certificate(chain, delta_star)
    r_star, rho_star = optimize_rho(cert)
    return delta_star, r_star, rho_star


def doeblin_geometric(eps: float) -> GeometricBound:
    """The Doeblin TV curve 1 * (1-eps)^t as a GeometricBound."""
    if not 0.0 < eps <= 1.0:
        raise ValueError("eps must lie in (0, 1]")
    return GeometricBound(c=1.0, rho=1.0 - eps, distance="TV")


def gaussian_w1_geometric(mu_mean_norm: float,
                          chain: GaussianChain) -> GeometricBound:
    return GeometricBound(c=mu_mean_norm + math.sqrt(chain.p),
                          rho=chain.alpha, distance="W1")


def gaussian_tv_geometric(mu_mean_norm: float,
                          chain: GaussianChain) -> GeometricBound:
    """The one-shot TV curve as c*alpha^t (the t-1 exponent folded into c).

    alpha = 0 degenerates to the exact-sampler curve with rate 0.
    """
    if chain.alpha == 0.0:
        return GeometricBound(c=0.0, rho=0.0, distance="TV")
    b = gaussian_one_shot_b(chain)
    c = b * (mu_mean_norm + math.sqrt(chain.p)) / chain.alpha
    return GeometricBound(c=c, rho=chain.alpha, distance="TV")


def dm_geometric(mu_h: float,
                 cert: DriftMinorizationCertificate) -> GeometricBound:
    _, rho_star = optimize_rho(cert)
    c = mu_h + stationary_moment_bound(cert.drift) + 1.0
    return GeometricBound(c=c, rho=rho_star, distance="TV")


# ---------------------------------------------------------------------------
# initial-law scalars (the toolkit's mus are point masses or isotropic
# Gaussians; anything else supplies its own numbers)
# ---------------------------------------------------------------------------

def point_mass_mean_norm(x) -> float:
    """The mean norm of a point mass at x: just |x|."""
    return float(np.linalg.norm(np.asarray(x, dtype=float)))


def gaussian_mean_norm(p: int, scale: float = 1.0) -> float:
    """E|Z| for Z ~ N_p(0, scale^2 I): scale*sqrt(2)*Gamma((p+1)/2)/Gamma(p/2)."""
    if p < 1:
        raise ValueError("dimension p must be a positive integer")
    return scale * math.sqrt(2.0) * math.exp(
        math.lgamma(0.5 * (p + 1)) - math.lgamma(0.5 * p))


def point_mass_mean_h(x) -> float:
    """Mean of h(x) = |x|^2/p under a point mass at x."""
    x = np.asarray(x, dtype=float)
    return float(x @ x) / x.size


def gaussian_mean_h(p: int, scale: float = 1.0) -> float:
    """Mean of h = |x|^2/p under N_p(0, scale^2 I): scale^2 exactly."""
    if p < 1:
        raise ValueError("dimension p must be a positive integer")
    return scale * scale


def write_bound_curve(path, bound: GeometricBound, horizon: int,
                      method: str) -> None:
    """CSV export of an evaluated bound curve: t,bound,distance,method."""
    if horizon < 0:
        raise ValueError("horizon must be nonnegative")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "bound", "distance", "method"])
        for t in range(horizon + 1):
            writer.writerow([t, format(bound.evaluate(t), ".17g"),
                             bound.distance, method])
