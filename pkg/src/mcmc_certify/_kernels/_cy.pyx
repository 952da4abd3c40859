# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo block drivers.

Bitwise twin of ``_py.py``: identical draw order, arithmetic, and branch
expressions, consuming the same BitGenerator stream through numpy's C
distribution functions (``random_standard_uniform`` is the ``next_double``
slot behind ``Generator.random``; ``random_standard_normal`` is the ziggurat
behind ``Generator.standard_normal``). The build sets ``-ffp-contract=off``
so no fused multiply-adds sneak in. Any change here must be applied to the
Python twin in the same commit.
"""

import numpy as np

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport cos, log, sqrt, M_PI
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_standard_normal,
    random_standard_uniform,
)

from ..errors import ConvergenceError

MAX_REJECTION_ITER = 10_000_000

cdef long _MAX_REJ = 10_000_000


cdef bitgen_t *_bitgen(object gen) except NULL:
    capsule = gen.bit_generator.capsule
    return <bitgen_t *> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef double _interp(double x, double[::1] xs, double[::1] vs) noexcept:
    cdef Py_ssize_t lo = 0
    cdef Py_ssize_t hi = xs.shape[0] - 1
    cdef Py_ssize_t mid
    cdef double t
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if xs[mid] <= x:
            lo = mid
        else:
            hi = mid
    t = (x - xs[lo]) / (xs[hi] - xs[lo])
    return vs[lo] + t * (vs[hi] - vs[lo])


cdef double _target(int kind, double x, double[::1] xs,
                    double[::1] vs) noexcept:
    if kind == 0:
        return 1.0
    if kind == 1:
        return 1.0 + cos(2.0 * M_PI * x) / 2.0
    return _interp(x, xs, vs)


cdef int _imh_residual(double *x, int kind, double[::1] xs, double[::1] vs,
                       double m_s, bitgen_t *bg) noexcept:
    cdef double sx = _target(kind, x[0], xs, vs)
    cdef double prop, coin, sp, a, rej
    cdef long it
    for it in range(_MAX_REJ):
        prop = random_standard_uniform(bg)
        coin = random_standard_uniform(bg)
        sp = _target(kind, prop, xs, vs)
        if not (coin * sx < sp):
            return 0
        a = sp / sx if sp < sx else 1.0
        rej = random_standard_uniform(bg)
        if rej * (m_s * a) >= sp:
            x[0] = prop
            return 0
    return 1


def imh_block(int strategy, int kind, object xs, object vals, object fn,
              double m_s, double eps, object x0, object y0, object c0,
              int horizon, object gen):
    """Coupled IMH trajectories for one replica block (see Python twin)."""
    if kind == 3:
        raise ValueError("callable targets run on the python backend only")
    cdef double[::1] xs_v = np.ascontiguousarray(
        xs if xs is not None and len(xs) else [0.0, 1.0], dtype=np.float64)
    cdef double[::1] vs_v = np.ascontiguousarray(
        vals if vals is not None and len(vals) else [1.0, 1.0],
        dtype=np.float64)
    cdef double[::1] x0_v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double[::1] y0_v = np.ascontiguousarray(y0, dtype=np.float64)
    cdef unsigned char[::1] c0_v = np.ascontiguousarray(c0, dtype=np.uint8)
    cdef bitgen_t *bg = _bitgen(gen)
    cdef Py_ssize_t B = x0_v.shape[0]
    cdef int T = horizon
    cnt_a = np.zeros(T + 1)
    spsi_a = np.zeros(T + 1)
    spsi2_a = np.zeros(T + 1)
    cdef double[::1] cnt = cnt_a
    cdef double[::1] spsi = spsi_a
    cdef double[::1] spsi2 = spsi2_a
    cdef Py_ssize_t i
    cdef int t, coal
    cdef double x, y, d, prop, coin, cand, u2

    for i in range(B):
        x = x0_v[i]
        y = y0_v[i]
        coal = c0_v[i]
        if not coal:
            cnt[0] += 1.0
            d = abs(x - y)
            spsi[0] += d
            spsi2[0] += d * d
        for t in range(1, T + 1):
            if coal:
                prop = random_standard_uniform(bg)
                coin = random_standard_uniform(bg)
                if coin * _target(kind, x, xs_v, vs_v) < _target(
                        kind, prop, xs_v, vs_v):
                    x = prop
                y = x
            elif strategy == 0:
                prop = random_standard_uniform(bg)
                coin = random_standard_uniform(bg)
                if coin * _target(kind, x, xs_v, vs_v) < _target(
                        kind, prop, xs_v, vs_v):
                    x = prop
                prop = random_standard_uniform(bg)
                coin = random_standard_uniform(bg)
                if coin * _target(kind, y, xs_v, vs_v) < _target(
                        kind, prop, xs_v, vs_v):
                    y = prop
            else:
                coin = random_standard_uniform(bg)
                if coin < eps:
                    while True:
                        cand = random_standard_uniform(bg)
                        u2 = random_standard_uniform(bg)
                        if u2 * m_s < _target(kind, cand, xs_v, vs_v):
                            break
                    x = cand
                    y = cand
                    coal = 1
                else:
                    if _imh_residual(&x, kind, xs_v, vs_v, m_s, bg):
                        raise ConvergenceError(
                            "IMH residual rejection sampler stalled")
                    if _imh_residual(&y, kind, xs_v, vs_v, m_s, bg):
                        raise ConvergenceError(
                            "IMH residual rejection sampler stalled")
            if not coal:
                cnt[t] += 1.0
                d = abs(x - y)
                spsi[t] += d
                spsi2[t] += d * d
    return cnt_a, spsi_a, spsi2_a


cdef int _gauss_maximal(double[::1] x, double[::1] y, int p, double alpha,
                        double sn, double inv2s2, double[::1] w,
                        double[::1] v, bitgen_t *bg) noexcept:
    # returns 1 coalesced, 0 not, -1 stalled
    cdef int j
    cdef double d1 = 0.0, d2 = 0.0, wj, t1, t2, u, dyv, dxv, vj, u2
    cdef long it
    for j in range(p):
        wj = alpha * x[j] + sn * random_standard_normal(bg)
        w[j] = wj
        t1 = wj - alpha * x[j]
        d1 += t1 * t1
        t2 = wj - alpha * y[j]
        d2 += t2 * t2
    u = random_standard_uniform(bg)
    if u <= 0.0 or log(u) <= (d1 - d2) * inv2s2:
        for j in range(p):
            x[j] = w[j]
            y[j] = w[j]
        return 1
    # X' = w; Y' from the residual of K(y,.) against k(x,.), so x must keep
    # its pre-step value until the loop resolves.
    for it in range(_MAX_REJ):
        dyv = 0.0
        dxv = 0.0
        for j in range(p):
            vj = alpha * y[j] + sn * random_standard_normal(bg)
            v[j] = vj
            t1 = vj - alpha * y[j]
            dyv += t1 * t1
            t2 = vj - alpha * x[j]
            dxv += t2 * t2
        u2 = random_standard_uniform(bg)
        if u2 > 0.0 and log(u2) > (dyv - dxv) * inv2s2:
            for j in range(p):
                x[j] = w[j]
                y[j] = v[j]
            return 0
    return -1


cdef int _gauss_dm_residual(double[::1] x, int p, double alpha, double sn,
                            double inv2s2, double m_dm, double[::1] w,
                            bitgen_t *bg) noexcept:
    cdef int j
    cdef double dxw, nw2, wj, t1, u, nwm
    cdef long it
    for it in range(_MAX_REJ):
        dxw = 0.0
        nw2 = 0.0
        for j in range(p):
            wj = alpha * x[j] + sn * random_standard_normal(bg)
            w[j] = wj
            t1 = wj - alpha * x[j]
            dxw += t1 * t1
            nw2 += wj * wj
        u = random_standard_uniform(bg)
        nwm = sqrt(nw2) + m_dm
        if u > 0.0 and log(u) > (dxw - nwm * nwm) * inv2s2:
            for j in range(p):
                x[j] = w[j]
            return 0
    return 1


def gauss_block(int strategy, int p, double alpha, object x0, object y0,
                object c0, int horizon, object gen, double eps_dm=0.0,
                double m_dm=0.0, double delta_dm=0.0, object nu_cdf=None,
                object nu_u=None):
    """Coupled Gaussian-chain trajectories for one block (see Python twin)."""
    cdef double[:, ::1] x0_v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double[:, ::1] y0_v = np.ascontiguousarray(y0, dtype=np.float64)
    cdef unsigned char[::1] c0_v = np.ascontiguousarray(c0, dtype=np.uint8)
    cdef double[::1] cdf_v
    cdef double[::1] uq_v
    if strategy == 3:
        if nu_cdf is None or nu_u is None:
            raise ValueError("DM coupling needs the minorization CDF table")
        cdf_v = np.ascontiguousarray(nu_cdf, dtype=np.float64)
        uq_v = np.ascontiguousarray(nu_u, dtype=np.float64)
    else:
        cdf_v = np.zeros(2)
        uq_v = np.zeros(2)
    cdef bitgen_t *bg = _bitgen(gen)
    cdef Py_ssize_t B = x0_v.shape[0]
    cdef int T = horizon
    cdef double sn = sqrt(1.0 - alpha * alpha)
    cdef double inv2s2 = 1.0 / (2.0 * sn * sn) if sn > 0.0 else 0.0
    cnt_a = np.zeros(T + 1)
    spsi_a = np.zeros(T + 1)
    spsi2_a = np.zeros(T + 1)
    cdef double[::1] cnt = cnt_a
    cdef double[::1] spsi = spsi_a
    cdef double[::1] spsi2 = spsi2_a
    cdef double[::1] x = np.empty(p)
    cdef double[::1] y = np.empty(p)
    cdef double[::1] w = np.empty(p)
    cdef double[::1] v = np.empty(p)
    cdef Py_ssize_t i
    cdef int t, j, coal, rc
    cdef double d2, dj, diff, hx, hy, coin, radius, nz, scale, zj

    for i in range(B):
        for j in range(p):
            x[j] = x0_v[i, j]
            y[j] = y0_v[i, j]
        coal = c0_v[i]
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
                for j in range(p):
                    x[j] = alpha * x[j] + sn * random_standard_normal(bg)
                    y[j] = x[j]
            elif strategy == 0:
                for j in range(p):
                    x[j] = alpha * x[j] + sn * random_standard_normal(bg)
                for j in range(p):
                    y[j] = alpha * y[j] + sn * random_standard_normal(bg)
            elif strategy == 1:
                for j in range(p):
                    diff = alpha * (x[j] - y[j])
                    x[j] = alpha * x[j] + sn * random_standard_normal(bg)
                    y[j] = x[j] - diff
            elif strategy == 2:
                rc = _gauss_maximal(x, y, p, alpha, sn, inv2s2, w, v, bg)
                if rc < 0:
                    raise ConvergenceError(
                        "maximal-coupling residual sampler stalled")
                coal = rc
            else:
                hx = 0.0
                hy = 0.0
                for j in range(p):
                    hx += x[j] * x[j]
                    hy += y[j] * y[j]
                hx /= p
                hy /= p
                if hx <= delta_dm and hy <= delta_dm:
                    coin = random_standard_uniform(bg)
                    if coin < eps_dm:
                        radius = _interp(random_standard_uniform(bg),
                                         cdf_v, uq_v)
                        nz = 0.0
                        for j in range(p):
                            zj = random_standard_normal(bg)
                            w[j] = zj
                            nz += zj * zj
                        scale = radius / sqrt(nz)
                        for j in range(p):
                            x[j] = scale * w[j]
                            y[j] = x[j]
                        coal = 1
                    else:
                        if _gauss_dm_residual(x, p, alpha, sn, inv2s2,
                                              m_dm, w, bg):
                            raise ConvergenceError(
                                "DM residual rejection sampler stalled")
                        if _gauss_dm_residual(y, p, alpha, sn, inv2s2,
                                              m_dm, w, bg):
                            raise ConvergenceError(
                                "DM residual rejection sampler stalled")
                else:
                    for j in range(p):
                        x[j] = alpha * x[j] + sn * random_standard_normal(bg)
                    for j in range(p):
                        y[j] = alpha * y[j] + sn * random_standard_normal(bg)
            if not coal:
                d2 = 0.0
                for j in range(p):
                    dj = x[j] - y[j]
                    d2 += dj * dj
                cnt[t] += 1.0
                spsi[t] += sqrt(d2)
                spsi2[t] += d2
    return cnt_a, spsi_a, spsi2_a


def rwmh_block(int p, double sigma, object x0, object y0, object c0,
               int horizon, object gen):
    """Independently coupled RWMH trajectories (see Python twin)."""
    cdef double[:, ::1] x0_v = np.ascontiguousarray(x0, dtype=np.float64)
    cdef double[:, ::1] y0_v = np.ascontiguousarray(y0, dtype=np.float64)
    cdef unsigned char[::1] c0_v = np.ascontiguousarray(c0, dtype=np.uint8)
    cdef bitgen_t *bg = _bitgen(gen)
    cdef Py_ssize_t B = x0_v.shape[0]
    cdef int T = horizon
    cnt_a = np.zeros(T + 1)
    spsi_a = np.zeros(T + 1)
    spsi2_a = np.zeros(T + 1)
    cdef double[::1] cnt = cnt_a
    cdef double[::1] spsi = spsi_a
    cdef double[::1] spsi2 = spsi2_a
    cdef double[::1] x = np.empty(p)
    cdef double[::1] y = np.empty(p)
    cdef double[::1] prop = np.empty(p)
    cdef Py_ssize_t i
    cdef int t, j, coal
    cdef double d2, dj

    for i in range(B):
        for j in range(p):
            x[j] = x0_v[i, j]
            y[j] = y0_v[i, j]
        coal = c0_v[i]
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
                _rwmh_step(x, p, sigma, prop, bg)
                for j in range(p):
                    y[j] = x[j]
            else:
                _rwmh_step(x, p, sigma, prop, bg)
                _rwmh_step(y, p, sigma, prop, bg)
                d2 = 0.0
                for j in range(p):
                    dj = x[j] - y[j]
                    d2 += dj * dj
                cnt[t] += 1.0
                spsi[t] += sqrt(d2)
                spsi2[t] += d2
    return cnt_a, spsi_a, spsi2_a


cdef void _rwmh_step(double[::1] v, int p, double sigma, double[::1] prop,
                     bitgen_t *bg) noexcept:
    cdef int j
    cdef double sv = 0.0, sp = 0.0, pj, u
    for j in range(p):
        pj = v[j] + sigma * random_standard_normal(bg)
        prop[j] = pj
        sv += v[j] * v[j]
        sp += pj * pj
    u = random_standard_uniform(bg)
    if u <= 0.0 or 2.0 * log(u) < sv - sp:
        for j in range(p):
            v[j] = prop[j]


def one_shot_block(int p, double alpha, object delta0, int horizon,
                   int replicas, object gen):
    """Indicator counts for the CRN + one maximal step pipeline."""
    cdef double[::1] delta = np.ascontiguousarray(
        delta0, dtype=np.float64).copy()
    cdef bitgen_t *bg = _bitgen(gen)
    cdef double sn = sqrt(1.0 - alpha * alpha)
    cdef double inv2s2 = 1.0 / (2.0 * sn * sn) if sn > 0.0 else 0.0
    cnt_a = np.zeros(horizon + 1)
    cdef double[::1] cnt = cnt_a
    cdef int t, j
    cdef long r, uneq
    cdef double d1, d2, wj, t1, u
    for t in range(1, horizon + 1):
        uneq = 0
        for r in range(replicas):
            d1 = 0.0
            d2 = 0.0
            for j in range(p):
                wj = alpha * delta[j] + sn * random_standard_normal(bg)
                t1 = wj - alpha * delta[j]
                d1 += t1 * t1
                d2 += wj * wj
            u = random_standard_uniform(bg)
            if not (u <= 0.0 or log(u) <= (d1 - d2) * inv2s2):
                uneq += 1
        cnt[t] = uneq
        for j in range(p):
            delta[j] = alpha * delta[j]
    return cnt_a
