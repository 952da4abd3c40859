"""Time the pure-Python block drivers against the compiled extension.

Both backends walk identical replica blocks and consume identical random
streams, so the comparison is arithmetic-for-arithmetic. Run as

    python3 benchmarks/bench_kernels.py [--replicas N] [--horizon T]
"""

import argparse
import time

import numpy as np

from mcmc_certify._kernels import backends


def _time(fn, min_seconds=0.2):
    # one warm call, then repeat until the budget is spent
    fn()
    n = 0
    t0 = time.perf_counter()
    while True:
        fn()
        n += 1
        dt = time.perf_counter() - t0
        if dt >= min_seconds:
            return dt / n


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replicas", type=int, default=2048)
    parser.add_argument("--horizon", type=int, default=20)
    args = parser.parse_args()

    mods = backends()
    if "compiled" not in mods:
        print("compiled backend not built; nothing to compare")
        return

    r, t = args.replicas, args.horizon
    p = 10
    x0 = np.tile(np.linspace(0.5, 1.5, p), (r, 1))
    y0 = np.zeros((r, p))
    c0 = np.zeros(r, dtype=np.uint8)
    xs = np.array([])
    vals = np.array([])
    ix0 = np.full(r, 0.1)
    iy0 = np.full(r, 0.9)

    cases = {
        "imh doeblin": lambda m, g: m.imh_block(
            2, 1, xs, vals, None, 1.5, 1.0 / 1.5, ix0, iy0, c0, t, g),
        "gauss crn": lambda m, g: m.gauss_block(
            1, p, 0.5, x0, y0, c0, t, g),
        "gauss maximal": lambda m, g: m.gauss_block(
            2, p, 0.5, x0, y0, c0, t, g),
        "rwmh": lambda m, g: m.rwmh_block(p, 0.5, x0, y0, c0, t, g),
        "one shot": lambda m, g: m.one_shot_block(
            p, 0.5, x0[0] - y0[0], t, r, g),
    }

    print(f"{r} replicas, horizon {t}, p = {p}")
    print(f"{'driver':<14}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, call in cases.items():
        times = {}
        for backend, mod in mods.items():
            gen = np.random.Generator(np.random.PCG64(99))
            times[backend] = _time(lambda: call(mod, gen))
        ratio = times["python"] / times["compiled"]
        print(f"{name:<14}{times['python']:>11.4f}s{times['compiled']:>11.4f}s"
              f"{ratio:>9.1f}x")


if __name__ == "__main__":
    main()
