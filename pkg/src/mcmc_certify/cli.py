"""Batch front end: JSON config in, deterministic CSV/JSON reports out.

The config names a chain, a list of analyses, Monte Carlo settings, and an
output spec. Parsing is strict: unknown keys are rejected everywhere, since
a silently ignored typo in a method name or a tolerance would invalidate
whatever the report is later cited for. Analyses run sequentially in listed
order; each gets its own seed stream, so inserting an analysis does not
shuffle the randomness of the ones after it. Per-analysis failures are
recorded in the report instead of aborting the run.

Exit codes: 0 success, 1 config error, 2 runtime analysis or I/O failure.
No environment variables are consulted.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .bounds import (doeblin_tv_bound, dm_tv_bound, gaussian_dm_certificate,
                     gaussian_drift_condition, gaussian_minorization_epsilon,
                     gaussian_tv_bound, gaussian_tv_geometric,
                     gaussian_w1_bound, gaussian_w1_geometric, mixing_time,
                     optimize_rho, optimize_rho_delta)
from .chains import (GaussianChain, ImhChain, RwmhChain, Rng, cosine_target,
                     imh_chain, imh_doeblin_epsilon, kernel_spec,
                     rwmh_move_mass_at_origin, tabulated_target,
                     uniform_target)
from .coupling import (crn_strategy, dm_strategy, doeblin_strategy,
                       fixed_pair, independent_strategy, maximal_strategy,
                       point_vs_stationary, simulate_coupling,
                       simulate_one_shot)
from .errors import ConfigError, McmcCertifyError
from .spectral import (asymptotic_variance_factor, cheeger_bracket,
                       conductance_exact, discretize_gaussian1d,
                       discretize_imh, discretize_rwmh1d,
                       gaussian_norm_upper_iso, gaussian_norm_upper_iso_opt,
                       norm_bracket_gaussian, norm_bracket_imh, operator_norm,
                       rwmh_norm_lower, sigma_star, spectral_gap)

GRID_LIMIT = 2000
ENUM_LIMIT = 24


# ---------------------------------------------------------------------------
# config objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class McSettings:
    replicas: int
    horizon: int
    seed: int


@dataclass(frozen=True)
class OutputSettings:
    directory: str
    formats: tuple[str, ...]


@dataclass(frozen=True)
class RunConfig:
    """A validated run request; ``raw`` keeps the exact parsed document."""

    raw: dict
    chain: object
    analyses: tuple
    mc: McSettings
    output: OutputSettings


@dataclass(frozen=True)
class Report:
    config_echo: dict
    results: tuple
    provenance: dict


# ---------------------------------------------------------------------------
# low-level validation helpers; every error names the offending field
# ---------------------------------------------------------------------------

def _need_object(v, path):
    if not isinstance(v, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return v


def _reject_unknown(obj, allowed, path):
    for k in obj:
        if k not in allowed:
            raise ConfigError(f"{path}: unknown key '{k}'")


def _require(obj, key, path):
    if key not in obj:
        raise ConfigError(f"{path}.{key}: required field is missing")
    return obj[key]


def _as_int(v, path, lo=None, hi=None):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{path}: expected an integer")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}: must be >= {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"{path}: must be <= {hi}")
    return v


def _as_num(v, path, lo=None, lo_open=None, hi_open=None):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}: expected a number")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{path}: must be finite")
    if lo is not None and v < lo:
        raise ConfigError(f"{path}: must be >= {lo}")
    if lo_open is not None and v <= lo_open:
        raise ConfigError(f"{path}: must be > {lo_open}")
    if hi_open is not None and v >= hi_open:
        raise ConfigError(f"{path}: must be < {hi_open}")
    return v


def _as_vector(v, path):
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{path}: expected a nonempty array of numbers")
    return [_as_num(u, f"{path}[{i}]") for i, u in enumerate(v)]


def _as_state(v, chain, path):
    """A chain state from JSON: scalar in [0,1] for IMH, length-p vector else."""
    if isinstance(chain, ImhChain):
        x = _as_num(v, path)
        if not 0.0 <= x <= 1.0:
            raise ConfigError(f"{path}: IMH states lie in [0, 1]")
        return x
    vec = _as_vector(v, path)
    if len(vec) != chain.p:
        raise ConfigError(f"{path}: expected a length-{chain.p} vector")
    return vec


def _delta_floor(chain):
    drift = gaussian_drift_condition(chain)
    return 2.0 * drift.big_l / (1.0 - drift.lam)


def _check_delta_level(v, chain, path):
    v = _as_num(v, path)
    floor = _delta_floor(chain)
    if not v > floor:
        raise ConfigError(
            f"{path}: must exceed 2L/(1 - lambda) = {floor:g} "
            "for this chain's drift condition")
    return v


# ---------------------------------------------------------------------------
# chain spec
# ---------------------------------------------------------------------------

def _parse_chain(obj, path="chain"):
    obj = _need_object(obj, path)
    family = _require(obj, "family", path)
    if family == "gaussian":
        _reject_unknown(obj, {"family", "p", "alpha"}, path)
        p = _as_int(_require(obj, "p", path), f"{path}.p", lo=1)
        alpha = _as_num(_require(obj, "alpha", path), f"{path}.alpha")
        try:
            return GaussianChain(p=p, alpha=alpha)
        except ValueError as exc:
            raise ConfigError(f"{path}.alpha: {exc}") from exc
    if family == "rwmh":
        _reject_unknown(obj, {"family", "p", "sigma"}, path)
        p = _as_int(_require(obj, "p", path), f"{path}.p", lo=1)
        sigma = _as_num(_require(obj, "sigma", path), f"{path}.sigma")
        try:
            return RwmhChain(p=p, sigma=sigma)
        except ValueError as exc:
            raise ConfigError(f"{path}.sigma: {exc}") from exc
    if family == "imh":
        _reject_unknown(obj, {"family", "target"}, path)
        spec = _require(obj, "target", path)
        try:
            if spec == "uniform":
                target = uniform_target()
            elif spec == "cosine":
                target = cosine_target()
            elif isinstance(spec, dict):
                _reject_unknown(spec, {"xs", "vals"}, f"{path}.target")
                xs = _as_vector(_require(spec, "xs", f"{path}.target"),
                                f"{path}.target.xs")
                vals = _as_vector(_require(spec, "vals", f"{path}.target"),
                                  f"{path}.target.vals")
                target = tabulated_target(xs, vals)
            else:
                raise ConfigError(
                    f"{path}.target: expected 'uniform', 'cosine', or "
                    "an object with xs/vals")
            return imh_chain(target)
        except (ValueError, McmcCertifyError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{path}.target: {exc}") from exc
    raise ConfigError(f"{path}.family: unknown family '{family}'")


def _family(chain) -> str:
    if isinstance(chain, ImhChain):
        return "imh"
    if isinstance(chain, GaussianChain):
        return "gaussian"
    return "rwmh"


# ---------------------------------------------------------------------------
# the method registry: name -> (allowed families, validator, runner)
#
# Validators canonicalize parameters (filling documented defaults) so the
# report can echo the exact parameter set each analysis actually used.
# ---------------------------------------------------------------------------

def _tmax(params, mc):
    return params["t_max"] if params.get("t_max") is not None else mc.horizon


def _curve(ts, values, stderr=None):
    out = {"t": [int(t) for t in ts], "value": [float(v) for v in values]}
    if stderr is not None:
        out["stderr"] = [float(s) for s in stderr]
    return out


def _v_doeblin_tv(params, chain, path):
    _reject_unknown(params, {"eps", "t_max"}, path)
    eps = _as_num(_require(params, "eps", path), f"{path}.eps",
                  lo_open=0.0)
    if eps > 1.0:
        raise ConfigError(f"{path}.eps: must lie in (0, 1]")
    out = {"eps": eps}
    if "t_max" in params:
        out["t_max"] = _as_int(params["t_max"], f"{path}.t_max", lo=1)
    return out


def _r_doeblin_tv(chain, params, mc, rng):
    t_max = _tmax(params, mc)
    ts = range(t_max + 1)
    vals = [doeblin_tv_bound(params["eps"], t) for t in ts]
    return {"params": {**params, "t_max": t_max},
            "curves": {"bound": _curve(ts, vals)}}


def _v_imh_tv(params, chain, path):
    _reject_unknown(params, {"t_max"}, path)
    out = {}
    if "t_max" in params:
        out["t_max"] = _as_int(params["t_max"], f"{path}.t_max", lo=1)
    return out


def _r_imh_tv(chain, params, mc, rng):
    eps = imh_doeblin_epsilon(chain)
    t_max = _tmax(params, mc)
    ts = range(t_max + 1)
    vals = [doeblin_tv_bound(eps, t) for t in ts]
    return {"params": {**params, "t_max": t_max},
            "scalars": {"eps": eps, "m_s": chain.m_s},
            "curves": {"bound": _curve(ts, vals)}}


def _v_mu_curve(params, chain, path):
    _reject_unknown(params, {"mu_mean_norm", "t_max"}, path)
    out = {"mu_mean_norm": _as_num(_require(params, "mu_mean_norm", path),
                                   f"{path}.mu_mean_norm", lo=0.0)}
    if "t_max" in params:
        out["t_max"] = _as_int(params["t_max"], f"{path}.t_max", lo=1)
    return out


def _r_gaussian_w1(chain, params, mc, rng):
    t_max = _tmax(params, mc)
    ts = range(t_max + 1)
    vals = [gaussian_w1_bound(params["mu_mean_norm"], chain, t) for t in ts]
    return {"params": {**params, "t_max": t_max},
            "curves": {"bound": _curve(ts, vals)}}


def _r_gaussian_tv(chain, params, mc, rng):
    t_max = _tmax(params, mc)
    ts = range(t_max + 1)
    # t = 0 spends no coupling step; the bound there is the trivial 1
    vals = [1.0 if t == 0 else
            gaussian_tv_bound(params["mu_mean_norm"], chain, t) for t in ts]
    return {"params": {**params, "t_max": t_max},
            "curves": {"bound": _curve(ts, vals)}}


def _v_dm_tv(params, chain, path):
    _reject_unknown(params, {"mu_h", "delta_level", "t_max"}, path)
    out = {"mu_h": _as_num(_require(params, "mu_h", path), f"{path}.mu_h",
                           lo=0.0),
           "delta_level": _check_delta_level(params.get("delta_level", 4.0),
                                             chain, f"{path}.delta_level")}
    if "t_max" in params:
        out["t_max"] = _as_int(params["t_max"], f"{path}.t_max", lo=1)
    return out


def _r_dm_tv(chain, params, mc, rng):
    cert = gaussian_dm_certificate(chain, params["delta_level"])
    r_star, rho_star = optimize_rho(cert)
    t_max = _tmax(params, mc)
    ts = range(t_max + 1)
    vals = [dm_tv_bound(params["mu_h"], cert, t) for t in ts]
    return {"params": {**params, "t_max": t_max},
            "scalars": {"eps": cert.eps, "r_star": r_star,
                        "rho_star": rho_star},
            "curves": {"bound": _curve(ts, vals)}}


def _v_delta_only(params, chain, path):
    _reject_unknown(params, {"delta_level"}, path)
    return {"delta_level": _check_delta_level(
        _require(params, "delta_level", path), chain,
        f"{path}.delta_level")}


def _r_minorization_eps(chain, params, mc, rng):
    eps = gaussian_minorization_epsilon(chain.p, chain.alpha,
                                        params["delta_level"])
    return {"params": params, "scalars": {"eps": eps}}


def _r_optimize_rho(chain, params, mc, rng):
    cert = gaussian_dm_certificate(chain, params["delta_level"])
    r_star, rho_star = optimize_rho(cert)
    return {"params": params,
            "scalars": {"eps": cert.eps, "lam": cert.drift.lam,
                        "big_l": cert.drift.big_l, "r_star": r_star,
                        "rho_star": rho_star,
                        "one_minus_rho": 1.0 - rho_star}}


def _v_empty(params, chain, path):
    _reject_unknown(params, set(), path)
    return {}


def _r_optimize_rho_delta(chain, params, mc, rng):
    delta_star, r_star, rho_star = optimize_rho_delta(chain)
    return {"params": params,
            "scalars": {"delta_star": delta_star, "r_star": r_star,
                        "rho_star": rho_star,
                        "one_minus_rho": 1.0 - rho_star}}


def _v_mixing(params, chain, path):
    _reject_unknown(params, {"eps_tol", "mu_mean_norm", "distance"}, path)
    dist = params.get("distance", "tv")
    if dist not in ("tv", "w1"):
        raise ConfigError(f"{path}.distance: expected 'tv' or 'w1'")
    return {"eps_tol": _as_num(_require(params, "eps_tol", path),
                               f"{path}.eps_tol", lo_open=0.0),
            "mu_mean_norm": _as_num(_require(params, "mu_mean_norm", path),
                                    f"{path}.mu_mean_norm", lo=0.0),
            "distance": dist}


def _r_mixing(chain, params, mc, rng):
    if params["distance"] == "tv":
        bound = gaussian_tv_geometric(params["mu_mean_norm"], chain)
    else:
        bound = gaussian_w1_geometric(params["mu_mean_norm"], chain)
    t = mixing_time(bound, params["eps_tol"])
    return {"params": params, "scalars": {"t_mix": float(t)}}


_STRATEGIES = {
    "imh": ("independent", "doeblin_split"),
    "gaussian": ("independent", "crn", "maximal", "dm_split"),
    "rwmh": ("independent",),
}


def _v_simulate(params, chain, path):
    _reject_unknown(params, {"strategy", "x0", "y0", "delta_level"}, path)
    fam = _family(chain)
    strat = _require(params, "strategy", path)
    if strat not in _STRATEGIES[fam]:
        raise ConfigError(
            f"{path}.strategy: '{strat}' is not available for the {fam} "
            f"family (choose from {list(_STRATEGIES[fam])})")
    out = {"strategy": strat,
           "x0": _as_state(_require(params, "x0", path), chain,
                           f"{path}.x0")}
    y0 = _require(params, "y0", path)
    if y0 == "stationary":
        out["y0"] = "stationary"
    else:
        out["y0"] = _as_state(y0, chain, f"{path}.y0")
    if strat == "dm_split":
        out["delta_level"] = _check_delta_level(
            params.get("delta_level", 4.0), chain, f"{path}.delta_level")
    elif "delta_level" in params:
        raise ConfigError(
            f"{path}.delta_level: only meaningful for the dm_split strategy")
    return out


def _r_simulate(chain, params, mc, rng):
    strat = params["strategy"]
    if strat == "independent":
        strategy = independent_strategy()
    elif strat == "crn":
        strategy = crn_strategy()
    elif strat == "maximal":
        strategy = maximal_strategy()
    elif strat == "doeblin_split":
        strategy = doeblin_strategy()
    else:
        strategy = dm_strategy(
            gaussian_dm_certificate(chain, params["delta_level"]))
    if params["y0"] == "stationary":
        init = point_vs_stationary(params["x0"], chain)
    else:
        init = fixed_pair(params["x0"], params["y0"])
    est = simulate_coupling(strategy, kernel_spec(chain), init,
                            mc.horizon, mc.replicas, rng)
    ts = range(mc.horizon + 1)
    return {"params": params,
            "curves": {"p_unequal": _curve(ts, est.p_unequal,
                                           est.se_unequal),
                       "mean_psi": _curve(ts, est.mean_psi, est.se_psi)}}


def _v_one_shot(params, chain, path):
    _reject_unknown(params, {"x0", "y0"}, path)
    return {"x0": _as_state(_require(params, "x0", path), chain,
                            f"{path}.x0"),
            "y0": _as_state(_require(params, "y0", path), chain,
                            f"{path}.y0")}


def _r_one_shot(chain, params, mc, rng):
    est = simulate_one_shot(chain, params["x0"], params["y0"],
                            mc.horizon, mc.replicas, rng)
    ts = range(mc.horizon + 1)
    return {"params": params,
            "curves": {"p_unequal": _curve(ts, est.p_unequal,
                                           est.se_unequal),
                       "mean_psi": _curve(ts, est.mean_psi, est.se_psi)}}


def _v_bracket(params, chain, path):
    allowed = {"width"} if isinstance(chain, ImhChain) else {"n"}
    _reject_unknown(params, allowed, path)
    out = {}
    if "width" in params:
        out["width"] = _as_num(params["width"], f"{path}.width",
                               lo_open=0.0, hi_open=1.0)
    if "n" in params:
        out["n"] = _as_int(params["n"], f"{path}.n", lo=2, hi=GRID_LIMIT)
    return out


def _r_bracket(chain, params, mc, rng):
    if isinstance(chain, ImhChain):
        bracket = norm_bracket_imh(chain, params.get("width", 1e-4))
    else:
        bracket = norm_bracket_gaussian(chain, params.get("n", 80))
    return {"params": params,
            "scalars": {"lower": bracket.lower, "upper": bracket.upper},
            "provenance": list(bracket.provenance)}


def _v_grid(params, chain, path, hi=GRID_LIMIT):
    allowed = {"n", "span"} if isinstance(chain, RwmhChain) else {"n"}
    _reject_unknown(params, allowed, path)
    out = {"n": _as_int(_require(params, "n", path), f"{path}.n",
                        lo=2, hi=hi)}
    if "span" in params:
        out["span"] = _as_num(params["span"], f"{path}.span", lo_open=0.0)
    if not isinstance(chain, ImhChain) and chain.p != 1:
        raise ConfigError(f"{path}: grid oracles need p = 1")
    return out


def _v_grid_norm(params, chain, path):
    return _v_grid(params, chain, path, hi=GRID_LIMIT)


def _v_grid_cond(params, chain, path):
    return _v_grid(params, chain, path, hi=ENUM_LIMIT)


def _oracle_grid(chain, params):
    if isinstance(chain, ImhChain):
        return discretize_imh(chain, params["n"])
    if isinstance(chain, GaussianChain):
        return discretize_gaussian1d(chain, params["n"])
    return discretize_rwmh1d(chain, params["n"], params.get("span", 8.0))


def _r_grid_norm(chain, params, mc, rng):
    return {"params": params,
            "scalars": {"norm": operator_norm(_oracle_grid(chain, params))}}


def _r_grid_gap(chain, params, mc, rng):
    gap = spectral_gap(_oracle_grid(chain, params))
    scalars = {"gap": gap}
    if gap > 0.0:
        scalars["variance_factor"] = asymptotic_variance_factor(gap)
    return {"params": params, "scalars": scalars}


def _r_grid_cond(chain, params, mc, rng):
    phi, subset = conductance_exact(_oracle_grid(chain, params))
    lo, hi = cheeger_bracket(phi)
    return {"params": params,
            "scalars": {"phi": phi, "gap_lower": lo, "gap_upper": hi},
            "subset": sorted(subset)}


def _r_iso(chain, params, mc, rng):
    return {"params": params,
            "scalars": {"upper": gaussian_norm_upper_iso(chain)}}


def _r_iso_opt(chain, params, mc, rng):
    upper, a_star, delta_star = gaussian_norm_upper_iso_opt(chain)
    return {"params": params,
            "scalars": {"upper": upper, "a_star": a_star,
                        "delta_star": delta_star}}


def _r_rwmh_lower(chain, params, mc, rng):
    return {"params": params,
            "scalars": {"lower": rwmh_norm_lower(chain),
                        "move_mass_at_origin":
                            rwmh_move_mass_at_origin(chain)}}


def _r_sigma_star(chain, params, mc, rng):
    s = sigma_star(chain.p)
    return {"params": params,
            "scalars": {"sigma_star": s, "sigma_star_sq": s * s}}


_METHODS = {
    "doeblin_tv_bound": (("imh", "gaussian", "rwmh"), _v_doeblin_tv,
                         _r_doeblin_tv),
    "imh_tv_bound": (("imh",), _v_imh_tv, _r_imh_tv),
    "gaussian_w1_bound": (("gaussian",), _v_mu_curve, _r_gaussian_w1),
    "gaussian_tv_bound": (("gaussian",), _v_mu_curve, _r_gaussian_tv),
    "dm_tv_bound": (("gaussian",), _v_dm_tv, _r_dm_tv),
    "gaussian_minorization_epsilon": (("gaussian",), _v_delta_only,
                                      _r_minorization_eps),
    "optimize_rho": (("gaussian",), _v_delta_only, _r_optimize_rho),
    "optimize_rho_delta": (("gaussian",), _v_empty, _r_optimize_rho_delta),
    "mixing_time": (("gaussian",), _v_mixing, _r_mixing),
    "simulate_coupling": (("imh", "gaussian", "rwmh"), _v_simulate,
                          _r_simulate),
    "simulate_one_shot": (("gaussian",), _v_one_shot, _r_one_shot),
    "norm_bracket": (("imh", "gaussian"), _v_bracket, _r_bracket),
    "grid_norm": (("imh", "gaussian", "rwmh"), _v_grid_norm, _r_grid_norm),
    "grid_gap": (("imh", "gaussian", "rwmh"), _v_grid_norm, _r_grid_gap),
    "grid_conductance": (("imh", "gaussian", "rwmh"), _v_grid_cond,
                         _r_grid_cond),
    "gaussian_norm_upper_iso": (("gaussian",), _v_empty, _r_iso),
    "gaussian_norm_upper_iso_opt": (("gaussian",), _v_empty, _r_iso_opt),
    "rwmh_norm_lower": (("rwmh",), _v_empty, _r_rwmh_lower),
    "sigma_star": (("rwmh",), _v_empty, _r_sigma_star),
}


# ---------------------------------------------------------------------------
# parse / run / emit
# ---------------------------------------------------------------------------

def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config syntax error at line {exc.lineno}, "
                          f"column {exc.colno}: {exc.msg}") from exc
    raw = _need_object(raw, "config")
    _reject_unknown(raw, {"chain", "analyses", "mc", "output"}, "config")
    chain = _parse_chain(_require(raw, "chain", "config"))
    fam = _family(chain)

    mc_obj = _need_object(_require(raw, "mc", "config"), "mc")
    _reject_unknown(mc_obj, {"replicas", "horizon", "seed"}, "mc")
    mc = McSettings(
        replicas=_as_int(_require(mc_obj, "replicas", "mc"), "mc.replicas",
                         lo=1),
        horizon=_as_int(_require(mc_obj, "horizon", "mc"), "mc.horizon",
                        lo=1),
        seed=_as_int(_require(mc_obj, "seed", "mc"), "mc.seed", lo=0,
                     hi=2 ** 64 - 1))

    out_obj = _need_object(_require(raw, "output", "config"), "output")
    _reject_unknown(out_obj, {"directory", "formats"}, "output")
    formats = _require(out_obj, "formats", "output")
    if (not isinstance(formats, list) or not formats
            or len(set(formats)) != len(formats)
            or any(f not in ("csv", "json") for f in formats)):
        raise ConfigError("output.formats: expected a nonempty list of "
                          "distinct entries from ['csv', 'json']")
    directory = out_obj.get("directory", ".")
    if not isinstance(directory, str):
        raise ConfigError("output.directory: expected a string")
    output = OutputSettings(directory=directory, formats=tuple(formats))

    analyses_obj = _require(raw, "analyses", "config")
    if not isinstance(analyses_obj, list):
        raise ConfigError("analyses: expected an array")
    analyses = []
    for i, entry in enumerate(analyses_obj):
        path = f"analyses[{i}]"
        entry = _need_object(entry, path)
        method = _require(entry, "method", path)
        if method not in _METHODS:
            raise ConfigError(f"{path}.method: unknown method '{method}'")
        families, validator, _ = _METHODS[method]
        if fam not in families:
            raise ConfigError(
                f"{path}.method: '{method}' does not apply to the {fam} "
                "family")
        params = {k: v for k, v in entry.items() if k != "method"}
        analyses.append((method, validator(params, chain, path)))

    return RunConfig(raw=raw, chain=chain, analyses=tuple(analyses),
                     mc=mc, output=output)


def run(config: RunConfig) -> Report:
    """Execute the analyses in order; failures are recorded, not raised."""
    start = time.monotonic()
    results = []
    for i, (method, params) in enumerate(config.analyses):
        _, _, runner = _METHODS[method]
        rng = Rng(seed=config.mc.seed, stream=i)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                body = runner(config.chain, params, config.mc, rng)
            result = {"method": method, "status": "ok", **body}
        except (McmcCertifyError, ValueError, OverflowError) as exc:
            result = {"method": method, "status": "error",
                      "params": params, "error": str(exc)}
        results.append(result)
    provenance = {"toolkit": f"mcmc-certify {__version__}",
                  "seed": config.mc.seed,
                  "wall_time_s": time.monotonic() - start}
    return Report(config_echo=config.raw, results=tuple(results),
                  provenance=provenance)


def emit(report: Report, output: OutputSettings, out_dir=None) -> list:
    """Write the report files; returns the paths written.

    One JSON document for the whole report; one CSV per curve, named
    ``NN_method_curve.csv`` by analysis position. CSV numbers carry 17
    significant digits so parsing them back is exact, which is what makes
    the determinism checks byte-for-byte meaningful.
    """
    directory = Path(out_dir if out_dir is not None else output.directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    if "json" in output.formats:
        path = directory / "report.json"
        doc = {"config_echo": report.config_echo,
               "results": list(report.results),
               "provenance": report.provenance}
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        written.append(path)
    if "csv" in output.formats:
        for i, result in enumerate(report.results):
            for name, curve in result.get("curves", {}).items():
                path = directory / f"{i:02d}_{result['method']}_{name}.csv"
                with open(path, "w", newline="") as fh:
                    writer = csv.writer(fh)
                    has_se = "stderr" in curve
                    writer.writerow(["t", "value", "stderr"] if has_se
                                    else ["t", "value"])
                    for k, t in enumerate(curve["t"]):
                        row = [t, format(curve["value"][k], ".17g")]
                        if has_se:
                            row.append(format(curve["stderr"][k], ".17g"))
                        writer.writerow(row)
                written.append(path)
    return written


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _summarize(result) -> str:
    if result["status"] == "error":
        return f"error: {result['error']}"
    bits = []
    for k, v in list(result.get("scalars", {}).items())[:3]:
        bits.append(f"{k}={v:.6g}")
    for name in result.get("curves", {}):
        bits.append(f"curve:{name}")
    return "ok " + ", ".join(bits) if bits else "ok"


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mcmc-certify",
        description="Convergence-bound reports for Markov chains")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="execute a config and emit reports")
    p_run.add_argument("config", help="path to a JSON config")
    p_run.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
    p_val = sub.add_parser("validate", help="parse a config and stop")
    p_val.add_argument("config", help="path to a JSON config")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text(encoding="utf-8")
        config = parse_config(text)
    except (OSError, UnicodeDecodeError, ConfigError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    if args.command == "validate":
        print(f"config ok: {_family(config.chain)} chain, "
              f"{len(config.analyses)} analyses")
        return 0

    report = run(config)
    for i, result in enumerate(report.results):
        print(f"[{i}] {result['method']}: {_summarize(result)}")
    try:
        written = emit(report, config.output, args.out)
    except OSError as exc:
        print(f"emit error: {exc}", file=sys.stderr)
        return 2
    for path in written:
        print(f"wrote {path}")
    if any(r["status"] == "error" for r in report.results):
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
