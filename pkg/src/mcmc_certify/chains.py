"""The three running chains and their closed-form quantities.

Families:

* independent Metropolis-Hastings (IMH) on [0,1]: uniform proposals against
  a positive continuous target density s, acceptance
  a_s(x,x') = min{1, s(x')/s(x)}. With M_s = sup s, every row dominates
  (1/M_s) times the target, which is the Doeblin constant the TV bounds use.
* the Gaussian autoregressive chain on R^p: X' ~ N_p(αx, (1-α²)I_p),
  stationary N_p(0, I_p). The one chain whose row-to-row total variation
  distance has a closed form, which the one-shot machinery exploits.
* random-walk Metropolis-Hastings (RWMH) on R^p targeting N_p(0, I_p) with
  N_p(x, σ²I_p) proposals; its move probability from the origin is
  (σ²+1)^{-p/2} exactly, which drives the operator-norm lower bounds.

Randomness flows through :class:`Rng`, a value object naming a (seed, stream)
pair. Step functions take the mutable ``numpy.random.Generator`` produced by
``Rng.generator()`` and advance it; identical Rng values give bitwise
identical trajectories.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

from .errors import McmcCertifyError
from .numerics import Interval, Tolerance, integrate, minimize_scalar, normal_cdf

GRID_POINTS = 100_000


@dataclass(frozen=True)
class Rng:
    """Seed record: (seed, stream) plus a derivation path for children.

    ``generator()`` builds a fresh PCG64-backed Generator; ``child(k)``
    derives an independent stream, used by the Monte Carlo harness to give
    every replica block its own stream deterministically.
    """

    seed: int
    stream: int = 0
    path: tuple[int, ...] = field(default=())

    def __post_init__(self):
        for name in ("seed", "stream"):
            v = getattr(self, name)
            if not (0 <= int(v) < 2 ** 64):
                raise ValueError(f"{name} must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=self.seed,
                                    spawn_key=(self.stream, *self.path))
        return np.random.Generator(np.random.PCG64(ss))

    def child(self, k: int) -> "Rng":
        return Rng(self.seed, self.stream, self.path + (k,))


class ImhTarget:
    """Target density on [0,1] in a form both backends can evaluate.

    ``kind`` is one of ``uniform``, ``cosine``, ``tabulated``, ``callable``.
    Tabulated targets carry their node arrays so the compiled kernels can
    interpolate without calling back into Python.
    """

    def __init__(self, kind: str, fn: Optional[Callable] = None,
                 xs: Optional[np.ndarray] = None,
                 vals: Optional[np.ndarray] = None, label: str = ""):
        self.kind = kind
        self.fn = fn
        self.xs = xs
        self.vals = vals
        self.label = label or kind

    def __call__(self, x):
        if self.kind == "uniform":
            return np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0
        if self.kind == "cosine":
            return 1.0 + np.cos(2.0 * np.pi * np.asarray(x)) / 2.0 if np.ndim(x) \
                else 1.0 + math.cos(2.0 * math.pi * x) / 2.0
        if self.kind == "tabulated":
            return np.interp(x, self.xs, self.vals)
        if np.ndim(x):
            try:
                out = np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)
                if out.shape == np.shape(x):
                    return out
            except (TypeError, ValueError):
                pass
            return np.array([float(self.fn(xi)) for xi in np.asarray(x)])
        return float(self.fn(x))


def uniform_target() -> ImhTarget:
    return ImhTarget("uniform")


def cosine_target() -> ImhTarget:
    """s(x) = 1 + cos(2πx)/2; integrates to 1 exactly, sup s = 1.5 at x=0."""
    return ImhTarget("cosine")


def tabulated_target(xs, vals, label: str = "tabulated") -> ImhTarget:
    """Piecewise-linear density through (xs, vals), renormalized.

    Nodes must be strictly increasing and cover [0,1]; values must be
    strictly positive (positivity of s is what makes M_s finite and the
    Doeblin constant nonzero). Near-zero minima are accepted but the grid
    oracle downstream loses accuracy once min s is far below 1/n; stay above
    about 1e-3 for trustworthy discretizations.
    """
    xs = np.asarray(xs, dtype=float)
    vals = np.asarray(vals, dtype=float)
    if xs.ndim != 1 or xs.shape != vals.shape or xs.size < 2:
        raise ValueError("need matching 1-d arrays with at least 2 nodes")
    if not np.all(np.diff(xs) > 0):
        raise ValueError("tabulated x nodes must be strictly increasing")
    if abs(xs[0]) > 1e-12 or abs(xs[-1] - 1.0) > 1e-12:
        raise ValueError("tabulated nodes must cover [0,1] exactly")
    if np.any(vals <= 0):
        raise ValueError("tabulated density values must be positive")
    # trapezoid mass of the polyline is exact, so renormalization is exact
    mass = np.trapezoid(vals, xs)
    return ImhTarget("tabulated", xs=xs.copy(), vals=vals / mass, label=label)


def tabulated_target_from_csv(path) -> ImhTarget:
    """Load a two-column ``x,value`` CSV (optional header) as a target."""
    xs, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            try:
                x, v = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if not xs:
                    continue  # header line
                raise ValueError(f"malformed CSV row: {row!r}")
            xs.append(x)
            vals.append(v)
    return tabulated_target(xs, vals, label=str(path))


def callable_target(fn: Callable[[float], float], label: str = "callable") -> ImhTarget:
    return ImhTarget("callable", fn=fn, label=label)


@dataclass(frozen=True)
class ImhChain:
    target: ImhTarget
    m_s: float


def imh_chain(target: Union[ImhTarget, Callable[[float], float]]) -> ImhChain:
    """Validate a target density and locate its supremum M_s.

    Positivity and normalization are checked on a 100k grid / by quadrature;
    M_s comes from the grid maximum refined by a golden-section search in
    the best grid cell, so m_s dominates s at every grid point by
    construction.
    """
    if not isinstance(target, ImhTarget):
        target = callable_target(target)
    grid = np.linspace(0.0, 1.0, GRID_POINTS)
    svals = np.asarray(target(grid), dtype=float)
    if not np.all(np.isfinite(svals)):
        raise McmcCertifyError("target density is not finite on [0,1]")
    if svals.min() <= 0.0:
        raise McmcCertifyError("target density must be positive on [0,1]")

    if target.kind == "tabulated":
        mass = float(np.trapezoid(target.vals, target.xs))
    elif target.kind == "uniform":
        mass = 1.0
    else:
        mass = integrate(lambda u: float(target(u)), Interval(0.0, 1.0),
                         Tolerance(abs_tol=1e-9, rel_tol=1e-9))
    if abs(mass - 1.0) > 1e-6:
        raise McmcCertifyError(
            f"target density integrates to {mass!r}, not 1 (within 1e-6)")

    k = int(np.argmax(svals))
    grid_max = float(svals[k])
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, GRID_POINTS - 1)]
    _, neg = minimize_scalar(lambda u: -float(target(u)), Interval(lo, hi),
                             Tolerance(abs_tol=1e-12, rel_tol=0.0, max_iter=200))
    m_s = max(grid_max, -neg)
    return ImhChain(target=target, m_s=m_s)


@dataclass(frozen=True)
class GaussianChain:
    """Autoregressive Gaussian chain: X' ~ N_p(αx, (1-α²)I_p)."""

    p: int
    alpha: float

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("dimension p must be a positive integer")
        if not 0.0 <= self.alpha < 1.0:
            raise ValueError("alpha must lie in [0, 1)")

    @property
    def noise_scale(self) -> float:
        return math.sqrt(1.0 - self.alpha * self.alpha)


@dataclass(frozen=True)
class RwmhChain:
    """Random-walk Metropolis targeting N_p(0, I_p), proposal N_p(x, σ²I_p)."""

    p: int
    sigma: float

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("dimension p must be a positive integer")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


# ---------------------------------------------------------------------------
# single steps
#
# Draw order is part of the contract: the compiled Monte Carlo kernels
# replay exactly these sequences of uniform/normal draws, so any change here
# must be mirrored in _kernels/_py.py and _kernels/_cy.pyx.
# ---------------------------------------------------------------------------

def imh_step(x: float, chain: ImhChain, rng: np.random.Generator) -> float:
    """One IMH transition: uniform proposal, accept with a_s(x, x')."""
    prop = rng.random()
    coin = rng.random()
    s = chain.target
    if coin * float(s(x)) < float(s(prop)):
        return prop
    return x


def gaussian_step(x: np.ndarray, chain: GaussianChain,
                  rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (chain.p,):
        raise ValueError(f"state must have shape ({chain.p},)")
    z = rng.standard_normal(chain.p)
    return chain.alpha * x + chain.noise_scale * z


def rwmh_step(x: np.ndarray, chain: RwmhChain,
              rng: np.random.Generator) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (chain.p,):
        raise ValueError(f"state must have shape ({chain.p},)")
    prop = x + chain.sigma * rng.standard_normal(chain.p)
    coin = rng.random()
    # accept with min{1, exp((|x|^2 - |x'|^2)/2)}; coin == 0 always accepts
    if coin <= 0.0 or math.log(coin) * 2.0 < float(x @ x) - float(prop @ prop):
        return prop
    return x


def imh_stationary_sample(chain: ImhChain, rng: np.random.Generator) -> float:
    """Exact draw from the IMH target by rejection from Uniform[0,1]."""
    s, m_s = chain.target, chain.m_s
    while True:
        cand = rng.random()
        coin = rng.random()
        if coin * m_s < float(s(cand)):
            return cand


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------

def imh_doeblin_epsilon(chain: ImhChain) -> float:
    """Doeblin constant for IMH: every row dominates (1/M_s)·π_s."""
    return 1.0 / chain.m_s


def gaussian_tv_between_rows(x, y, chain: GaussianChain) -> float:
    """Exact TV distance between K(x,·) and K(y,·) for the Gaussian chain.

    Projecting on the direction of αx - αy reduces the two rows to
    one-dimensional normals with equal variance 1-α², giving
    1 - 2 F_N(-α‖x-y‖ / (2√(1-α²))).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.shape != (chain.p,):
        raise ValueError("states must both have shape (p,)")
    if chain.alpha == 0.0:
        return 0.0
    d = float(np.linalg.norm(x - y))
    return 1.0 - 2.0 * normal_cdf(-chain.alpha * d / (2.0 * chain.noise_scale))


def rwmh_move_mass_at_origin(chain: RwmhChain) -> float:
    """T(0, {0}^c) = (σ²+1)^{-p/2}: the chance RWMH leaves the mode."""
    return (chain.sigma * chain.sigma + 1.0) ** (-chain.p / 2.0)


# ---------------------------------------------------------------------------
# kernel records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelSpec:
    """A chain packaged with its transition density decomposition.

    ``density`` is the absolutely continuous part k(x,x') (None when not
    available), ``self_mass`` the rejection atom K(x,{x}) (None when only
    Monte Carlo estimates exist, i.e. RWMH with p > 1).
    """

    family: str  # "imh" | "gaussian" | "rwmh"
    chain: Union[ImhChain, GaussianChain, RwmhChain]
    step: Callable
    density: Optional[Callable]
    self_mass: Optional[Callable]


def _imh_density(chain: ImhChain):
    s = chain.target

    def k(x, y):
        return min(1.0, float(s(y)) / float(s(x)))

    return k


def _imh_self_mass(chain: ImhChain):
    dens = _imh_density(chain)

    def atom(x):
        move = integrate(lambda u: dens(x, u), Interval(0.0, 1.0),
                         Tolerance(abs_tol=1e-10, rel_tol=1e-8))
        return max(0.0, 1.0 - move)

    return atom


def _gaussian_density(chain: GaussianChain):
    p, a = chain.p, chain.alpha
    s2 = 1.0 - a * a
    logc = -0.5 * p * math.log(2.0 * math.pi * s2)

    def k(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = y - a * x
        return math.exp(logc - float(d @ d) / (2.0 * s2))

    return k


def _rwmh_density(chain: RwmhChain):
    p, sig = chain.p, chain.sigma
    logc = -0.5 * p * math.log(2.0 * math.pi * sig * sig)

    def k(x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = y - x
        log_prop = logc - float(d @ d) / (2.0 * sig * sig)
        log_acc = min(0.0, (float(x @ x) - float(y @ y)) / 2.0)
        return math.exp(log_prop + log_acc)

    return k


def _rwmh_self_mass_1d(chain: RwmhChain):
    dens = _rwmh_density(chain)

    def atom(x):
        x = np.asarray(x, dtype=float)
        span = 10.0 * chain.sigma + 2.0
        move = integrate(lambda u: dens(x, np.array([u])),
                         Interval(float(x[0]) - span, float(x[0]) + span),
                         Tolerance(abs_tol=1e-10, rel_tol=1e-8))
        return max(0.0, 1.0 - move)

    return atom


def kernel_spec(chain) -> KernelSpec:
    """Package a chain record as a KernelSpec."""
    if isinstance(chain, ImhChain):
        return KernelSpec("imh", chain,
                          step=lambda x, rng: imh_step(x, chain, rng),
                          density=_imh_density(chain),
                          self_mass=_imh_self_mass(chain))
    if isinstance(chain, GaussianChain):
        return KernelSpec("gaussian", chain,
                          step=lambda x, rng: gaussian_step(x, chain, rng),
                          density=_gaussian_density(chain),
                          self_mass=lambda x: 0.0)
    if isinstance(chain, RwmhChain):
        return KernelSpec("rwmh", chain,
                          step=lambda x, rng: rwmh_step(x, chain, rng),
                          density=_rwmh_density(chain),
                          self_mass=_rwmh_self_mass_1d(chain) if chain.p == 1
                          else None)
    raise TypeError(f"unknown chain record: {type(chain).__name__}")


def rwmh_self_mass_mc(x, chain: RwmhChain, rng: np.random.Generator,
                      reps: int = 100_000) -> float:
    """Monte Carlo estimate of the RWMH rejection atom at x (any p)."""
    x = np.asarray(x, dtype=float)
    props = x[None, :] + chain.sigma * rng.standard_normal((reps, chain.p))
    log_ratio = (float(x @ x) - np.einsum("ij,ij->i", props, props)) / 2.0
    acc = np.minimum(1.0, np.exp(np.minimum(log_ratio, 0.0)))
    return float(1.0 - acc.mean())
