"""Scalar numerics underlying the certificate computations.

Everything here is one-dimensional on purpose. The single multivariate
integral in the toolkit (the minorization volume in :mod:`mcmc_certify.bounds`)
is reduced to a radial integral before it reaches :func:`integrate`.

The normal distribution helpers follow the usual convention: ``normal_pdf``
is f_N, the standard normal density, and ``normal_cdf`` is F_N, computed
through the complementary error function rather than quadrature so the tails
keep relative accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .errors import BracketError, ConvergenceError, IntegrationError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)
# golden-section step: 2 - golden ratio
_GOLDEN = (3.0 - math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class Tolerance:
    """Accuracy request for the iterative routines.

    ``max_iter`` budgets iterations for root finding and line search, and
    accepted subintervals for adaptive quadrature.
    """

    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_iter: int = 100_000

    def __post_init__(self):
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be nonnegative")
        if self.abs_tol + self.rel_tol <= 0:
            raise ValueError("abs_tol + rel_tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError("interval endpoints must be finite")
        if not self.lo < self.hi:
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo


DEFAULT_TOL = Tolerance()


def normal_pdf(z: float) -> float:
    """Standard normal density f_N(z) = (2π)^{-1/2} exp(-z²/2)."""
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def normal_cdf(z: float) -> float:
    """Standard normal distribution function F_N(z).

    Uses erfc so that deep tails (|z| of several) retain relative accuracy;
    a direct 1 - F_N(-z) subtraction would lose everything past z ≈ 8.
    """
    return 0.5 * math.erfc(-z / _SQRT2)


def _simpson(fa: float, fm: float, fb: float, h: float) -> float:
    # h is the full segment width
    return h * (fa + 4.0 * fm + fb) / 6.0


def integrate(f: Callable[[float], float], domain: Interval,
              tol: Tolerance = DEFAULT_TOL) -> float:
    """Adaptive Simpson quadrature of ``f`` over a finite interval.

    The error target is max(abs_tol, rel_tol * |integral|), with the scale
    taken from a 64-panel composite pass so a tiny integrand (the
    minorization integral lives at 1e-7) gets a meaningful relative budget.
    The same 64 panels seed the subdivision stack: a narrow feature then
    has to be invisible at the panel scale to be missed, not merely at the
    whole-interval scale, where Simpson's parent/child agreement test is
    easily fooled. Each subinterval receives a share of the budget
    proportional to its width. Raises :class:`IntegrationError` carrying
    the partial estimate when the subdivision budget ``tol.max_iter`` runs
    out.

    Semi-infinite integrals do not belong here: truncate first (see
    ``bounds.gaussian_minorization_epsilon`` for the envelope argument).
    """
    a, b = domain.lo, domain.hi
    span = b - a

    # scale pass: composite Simpson on 64 panels
    n0 = 64
    h0 = span / n0
    fs = [f(a + i * h0) for i in range(n0 + 1)]
    mids = [f(a + (i + 0.5) * h0) for i in range(n0)]
    coarse = 0.0
    for i in range(n0):
        coarse += _simpson(fs[i], mids[i], fs[i + 1], h0)
    eps_total = max(tol.abs_tol, tol.rel_tol * abs(coarse))

    # stack of (lo, hi, f_lo, f_mid, f_hi, simpson estimate), seeded with
    # the scale-pass panels
    stack = [(a + i * h0, a + (i + 1) * h0, fs[i], mids[i], fs[i + 1],
              _simpson(fs[i], mids[i], fs[i + 1], h0))
             for i in range(n0)]
    total = 0.0
    accepted_width = 0.0
    budget = tol.max_iter
    while stack:
        lo, hi, flo, fmid, fhi, s_whole = stack.pop()
        if budget <= 0:
            # sweep up whatever is left so the partial estimate is usable
            partial = total + s_whole + sum(seg[5] for seg in stack)
            raise IntegrationError(
                f"quadrature did not converge within {tol.max_iter} "
                f"subdivisions (covered {accepted_width / span:.3%} of the "
                "domain)", partial)
        budget -= 1
        mid = lo + 0.5 * (hi - lo)
        lm = lo + 0.25 * (hi - lo)
        rm = lo + 0.75 * (hi - lo)
        flm, frm = f(lm), f(rm)
        h = hi - lo
        s_left = _simpson(flo, flm, fmid, 0.5 * h)
        s_right = _simpson(fmid, frm, fhi, 0.5 * h)
        s2 = s_left + s_right
        err = (s2 - s_whole) / 15.0
        if abs(err) <= eps_total * (h / span) or h <= 1e-15 * span:
            total += s2 + err
            accepted_width += h
        else:
            stack.append((lo, mid, flo, flm, fmid, s_left))
            stack.append((mid, hi, fmid, frm, fhi, s_right))
    return total


def find_root(g: Callable[[float], float], bracket: Interval,
              tol: Tolerance = DEFAULT_TOL) -> float:
    """Bisection root of ``g`` on a sign-changing bracket.

    Stops when |g(mid)| ≤ abs_tol or the bracket width falls below
    abs_tol + rel_tol*|mid|. Bisection is deliberate: every routine feeding
    this (the proposal-scale equation, crossover checks) is cheap and the
    brackets are wide, so robustness beats iteration count.
    """
    a, b = bracket.lo, bracket.hi
    ga, gb = g(a), g(b)
    if ga == 0.0:
        return a
    if gb == 0.0:
        return b
    if (ga < 0.0) == (gb < 0.0):
        raise BracketError(
            f"no sign change on [{a}, {b}]: g(lo)={ga:.6g}, g(hi)={gb:.6g}")
    for _ in range(tol.max_iter):
        mid = 0.5 * (a + b)
        gm = g(mid)
        if abs(gm) <= tol.abs_tol or (b - a) <= tol.abs_tol + tol.rel_tol * abs(mid):
            return mid
        if (gm < 0.0) == (ga < 0.0):
            a, ga = mid, gm
        else:
            b = mid
    raise ConvergenceError(
        f"bisection did not converge in {tol.max_iter} iterations")


def minimize_scalar(g: Callable[[float], float], domain: Interval,
                    tol: Tolerance = DEFAULT_TOL) -> tuple[float, float]:
    """Coarse 1000-point grid scan, then golden-section on the best cell.

    Returns ``(argmin, min)`` for the best point found. No global-optimality
    claim is made; the grid stage exists because some objectives (a max of a
    decreasing and an increasing curve) are not unimodal or smooth at the
    crossover, where a bare golden section could stall on the wrong branch.
    """
    n = 1000
    lo, hi = domain.lo, domain.hi
    step = (hi - lo) / (n - 1)
    best_k = 0
    best_v = math.inf
    for k in range(n):
        v = g(lo + k * step)
        if v < best_v:
            best_k, best_v = k, v
    a = lo + max(best_k - 1, 0) * step
    b = lo + min(best_k + 1, n - 1) * step
    x_best = lo + best_k * step

    # golden section on [a, b]
    x1 = a + _GOLDEN * (b - a)
    x2 = b - _GOLDEN * (b - a)
    f1, f2 = g(x1), g(x2)
    for _ in range(tol.max_iter):
        if (b - a) <= max(tol.abs_tol, tol.rel_tol * max(abs(a), abs(b))):
            break
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = a + _GOLDEN * (b - a)
            f1 = g(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = b - _GOLDEN * (b - a)
            f2 = g(x2)
    for x, v in ((x1, f1), (x2, f2)):
        if v < best_v:
            x_best, best_v = x, v
    return x_best, best_v
