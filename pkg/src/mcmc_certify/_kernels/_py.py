"""Pure-Python Monte Carlo block drivers.

This module and ``_cy.pyx`` are twins: same draw order, same arithmetic,
same branch expressions, so that a block run on either backend from the same
Generator state produces bitwise-identical results. Keep them in lock step:

* uniforms come one at a time from ``gen.random()`` (the compiled twin calls
  ``random_standard_uniform``, the same ``next_double`` path);
* normals come from ``gen.standard_normal(p)``, which fills the vector by p
  successive ziggurat draws, exactly what the compiled twin does;
* inner products accumulate left to right in plain loops, never ``np.dot``
  (SIMD reassociation would flip borderline accept/reject branches);
* acceptance thresholds are written in one canonical form each, noted below.

Strategy codes: 0 independent, 1 Doeblin split / CRN, 2 maximal, 3 DM split.
IMH target codes: 0 uniform, 1 cosine, 2 tabulated, 3 Python callable (this
backend only).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ConvergenceError

MAX_REJECTION_ITER = 10_000_000


def _interp(x, xs, vs):
    # linear interpolation on a strictly increasing table; x inside range.
    # Mirror of the C helper: same bisection, same arithmetic.
    lo = 0
    hi = len(xs) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if xs[mid] <= x:
            lo = mid
        else:
            hi = mid
    t = (x - xs[lo]) / (xs[hi] - xs[lo])
    return vs[lo] + t * (vs[hi] - vs[lo])


def _make_target(kind, xs, vals, fn):
    if kind == 0:
        return lambda x: 1.0
    if kind == 1:
        two_pi = 2.0 * math.pi
        cos = math.cos
        return lambda x: 1.0 + cos(two_pi * x) / 2.0
    if kind == 2:
        xs_l = [float(v) for v in xs]
        vs_l = [float(v) for v in vals]
        return lambda x: _interp(x, xs_l, vs_l)
    if kind == 3:
        return lambda x: float(fn(x))
    raise ValueError(f"unknown IMH target kind {kind}")


def imh_block(strategy, kind, xs, vals, fn, m_s, eps, x0, y0, c0, horizon, gen):
    """Coupled IMH trajectories for one replica block.

    Returns (count_unequal, sum_psi, sum_psi_sq), each of length horizon+1,
    accumulated over the block. psi is |x - y|.
    """
    s = _make_target(kind, xs, vals, fn)
    U = gen.random
    B = len(x0)
    T = horizon
    cnt = np.zeros(T + 1)
    spsi = np.zeros(T + 1)
    spsi2 = np.zeros(T + 1)

    for i in range(B):
        x = float(x0[i])
        y = float(y0[i])
        coal = bool(c0[i])
        if not coal:
            cnt[0] += 1.0
            d = abs(x - y)
            spsi[0] += d
            spsi2[0] += d * d
        for t in range(1, T + 1):
            if coal:
                # move together: one plain step
                prop = U()
                coin = U()
                if coin * s(x) < s(prop):
                    x = prop
                y = x
            elif strategy == 0:
                prop = U()
                coin = U()
                if coin * s(x) < s(prop):
                    x = prop
                prop = U()
                coin = U()
                if coin * s(y) < s(prop):
                    y = prop
            else:
                coin = U()
                if coin < eps:
                    # nu = target law, by rejection from Uniform[0,1]
                    while True:
                        cand = U()
                        u2 = U()
                        if u2 * m_s < s(cand):
                            break
                    x = y = cand
                    coal = True
                else:
                    x = _imh_residual(x, s, m_s, U)
                    y = _imh_residual(y, s, m_s, U)
            if not coal:
                cnt[t] += 1.0
                d = abs(x - y)
                spsi[t] += d
                spsi2[t] += d * d
    return cnt, spsi, spsi2


def _imh_residual(x, s, m_s, U):
    # Sample (K(x,.) - eps*pi_s)/(1-eps) by rejection from K(x,.): the
    # rejection atom is kept with probability 1, an accepted a.c. candidate
    # w with probability 1 - s(w)/(M_s a_s(x,w)).
    sx = s(x)
    for _ in range(MAX_REJECTION_ITER):
        prop = U()
        coin = U()
        sp = s(prop)
        if not (coin * sx < sp):
            return x
        a = sp / sx if sp < sx else 1.0
        rej = U()
        # canonical form: rej * (m_s * a) >= s(w) accepts
        if rej * (m_s * a) >= sp:
            return prop
    raise ConvergenceError("IMH residual rejection sampler stalled")


def gauss_block(strategy, p, alpha, x0, y0, c0, horizon, gen,
                eps_dm=0.0, m_dm=0.0, delta_dm=0.0,
                nu_cdf=None, nu_u=None):
    """Coupled Gaussian-chain trajectories for one replica block.

    psi is the Euclidean distance, accumulated with its square. The CRN
    branch propagates the pair difference explicitly (y' = x' - alpha*(x-y))
    so the contraction identity is deterministic in floating point.
    """
    U = gen.random
    normal = gen.standard_normal
    B = len(x0)
    T = horizon
    sn = math.sqrt(1.0 - alpha * alpha)
    inv2s2 = 1.0 / (2.0 * sn * sn) if sn > 0.0 else 0.0
    log = math.log
    sqrt = math.sqrt
    if nu_cdf is not None:
        nu_cdf = [float(v) for v in nu_cdf]
        nu_u = [float(v) for v in nu_u]
    cnt = np.zeros(T + 1)
    spsi = np.zeros(T + 1)
    spsi2 = np.zeros(T + 1)

    for i in range(B):
        x = [float(v) for v in x0[i]]
        y = [float(v) for v in y0[i]]
        coal = bool(c0[i])
        if not coal:
            d2 = 0.0
            for j in range(p):
                dj = x[j] - y[j]
                d2 += dj * dj
            d = sqrt(d2)
            cnt[0] += 1.0
            spsi[0] += d
            spsi2[0] += d2
        for t in range(1, T + 1):
            if coal:
                z = normal(p)
                for j in range(p):
                    x[j] = alpha * x[j] + sn * z[j]
                    y[j] = x[j]
            elif strategy == 0:
                z = normal(p)
                for j in range(p):
                    x[j] = alpha * x[j] + sn * z[j]
                z = normal(p)
                for j in range(p):
                    y[j] = alpha * y[j] + sn * z[j]
            elif strategy == 1:
                z = normal(p)
                for j in range(p):
                    diff = alpha * (x[j] - y[j])
                    x[j] = alpha * x[j] + sn * z[j]
                    y[j] = x[j] - diff
            elif strategy == 2:
                coal = _gauss_maximal(x, y, p, alpha, sn, inv2s2, U, normal,
                                      log)
            else:
                hx = 0.0
                hy = 0.0
                for j in range(p):
                    hx += x[j] * x[j]
                    hy += y[j] * y[j]
                hx /= p
                hy /= p
                if hx <= delta_dm and hy <= delta_dm:
                    coin = U()
                    if coin < eps_dm:
                        radius = _interp(U(), nu_cdf, nu_u)
                        z = normal(p)
                        nz = 0.0
                        for j in range(p):
                            nz += z[j] * z[j]
                        scale = radius / sqrt(nz)
                        for j in range(p):
                            x[j] = scale * z[j]
                            y[j] = x[j]
                        coal = True
                    else:
                        _gauss_dm_residual(x, p, alpha, sn, inv2s2, m_dm, U,
                                           normal, log)
                        _gauss_dm_residual(y, p, alpha, sn, inv2s2, m_dm, U,
                                           normal, log)
                else:
                    z = normal(p)
                    for j in range(p):
                        x[j] = alpha * x[j] + sn * z[j]
                    z = normal(p)
                    for j in range(p):
                        y[j] = alpha * y[j] + sn * z[j]
            if not coal:
                d2 = 0.0
                for j in range(p):
                    dj = x[j] - y[j]
                    d2 += dj * dj
                d = sqrt(d2)
                cnt[t] += 1.0
                spsi[t] += d
                spsi2[t] += d2
    return cnt, spsi, spsi2


def _gauss_maximal(x, y, p, alpha, sn, inv2s2, U, normal, log):
    # One maximal coupled step, in place. Returns True when coalesced.
    z = normal(p)
    w = [0.0] * p
    d1 = 0.0
    d2 = 0.0
    for j in range(p):
        wj = alpha * x[j] + sn * z[j]
        w[j] = wj
        t1 = wj - alpha * x[j]
        d1 += t1 * t1
        t2 = wj - alpha * y[j]
        d2 += t2 * t2
    u = U()
    # couple iff u*k(x,w) <= k(y,w); canonical log form below
    if u <= 0.0 or log(u) <= (d1 - d2) * inv2s2:
        for j in range(p):
            x[j] = w[j]
            y[j] = w[j]
        return True
    # X' = w; Y' from the residual of K(y,.) against k(x,.), so x must keep
    # its pre-step value until the loop resolves.
    for _ in range(MAX_REJECTION_ITER):
        z = normal(p)
        dyv = 0.0
        dxv = 0.0
        v = [0.0] * p
        for j in range(p):
            vj = alpha * y[j] + sn * z[j]
            v[j] = vj
            t1 = vj - alpha * y[j]
            dyv += t1 * t1
            t2 = vj - alpha * x[j]
            dxv += t2 * t2
        u2 = U()
        if u2 > 0.0 and log(u2) > (dyv - dxv) * inv2s2:
            for j in range(p):
                x[j] = w[j]
                y[j] = v[j]
            return False
    raise ConvergenceError("maximal-coupling residual sampler stalled")


def _gauss_dm_residual(x, p, alpha, sn, inv2s2, m_dm, U, normal, log):
    # Sample (K(x,.) - q)/(1-eps) by rejection from K(x,.); accept w with
    # probability 1 - q(w)/k(x,w).
    for _ in range(MAX_REJECTION_ITER):
        z = normal(p)
        w = [0.0] * p
        dxw = 0.0
        nw2 = 0.0
        for j in range(p):
            wj = alpha * x[j] + sn * z[j]
            w[j] = wj
            t1 = wj - alpha * x[j]
            dxw += t1 * t1
            nw2 += wj * wj
        u = U()
        nwm = math.sqrt(nw2) + m_dm
        if u > 0.0 and log(u) > (dxw - nwm * nwm) * inv2s2:
            for j in range(p):
                x[j] = w[j]
            return
    raise ConvergenceError("DM residual rejection sampler stalled")


def rwmh_block(p, sigma, x0, y0, c0, horizon, gen):
    """Independently coupled RWMH trajectories (shared step once coalesced)."""
    U = gen.random
    normal = gen.standard_normal
    log = math.log
    sqrt = math.sqrt
    B = len(x0)
    T = horizon
    cnt = np.zeros(T + 1)
    spsi = np.zeros(T + 1)
    spsi2 = np.zeros(T + 1)

    def step(v):
        z = normal(p)
        sv = 0.0
        sp = 0.0
        prop = [0.0] * p
        for j in range(p):
            pj = v[j] + sigma * z[j]
            prop[j] = pj
            sv += v[j] * v[j]
            sp += pj * pj
        u = U()
        if u <= 0.0 or 2.0 * log(u) < sv - sp:
            return prop
        return v

    for i in range(B):
        x = [float(v) for v in x0[i]]
        y = [float(v) for v in y0[i]]
        coal = bool(c0[i])
        if not coal:
            d2 = 0.0
            for j in range(p):
                dj = x[j] - y[j]
                d2 += dj * dj
            cnt[0] += 1.0
            spsi[0] += sqrt(d2)
            spsi2[0] += d2
        for t in range(1, T + 1):
            if coal:
                x = step(x)
                y = list(x)
            else:
                x = step(x)
                y = step(y)
                d2 = 0.0
                for j in range(p):
                    dj = x[j] - y[j]
                    d2 += dj * dj
                cnt[t] += 1.0
                spsi[t] += sqrt(d2)
                spsi2[t] += d2
    return cnt, spsi, spsi2


def one_shot_block(p, alpha, delta0, horizon, replicas, gen):
    """Indicator estimates for the CRN-then-one-maximal-step pipeline.

    For each t in 1..horizon, runs `replicas` independent maximal-step
    coalescence indicators from a pair at difference alpha^(t-1) * delta0
    (the CRN stage contracts the difference deterministically, so the
    indicator law at time t depends only on that vector). Returns the
    count of non-coalesced draws per t; entry 0 is left at 0 for the
    caller to fill from the initial pair.
    """
    U = gen.random
    normal = gen.standard_normal
    log = math.log
    sn = math.sqrt(1.0 - alpha * alpha)
    inv2s2 = 1.0 / (2.0 * sn * sn) if sn > 0.0 else 0.0
    delta = [float(v) for v in delta0]
    cnt = np.zeros(horizon + 1)
    for t in range(1, horizon + 1):
        uneq = 0
        for _ in range(replicas):
            z = normal(p)
            d1 = 0.0
            d2 = 0.0
            for j in range(p):
                wj = alpha * delta[j] + sn * z[j]
                t1 = wj - alpha * delta[j]
                d1 += t1 * t1
                d2 += wj * wj
            u = U()
            if not (u <= 0.0 or log(u) <= (d1 - d2) * inv2s2):
                uneq += 1
        cnt[t] = uneq
        for j in range(p):
            delta[j] = alpha * delta[j]
    return cnt
