"""
Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--draws 20000] [--n 100000] [--repeat 3]

Reports the best wall time of each kernel under both backends and checks
that the outputs agree.
"""
import argparse
import time

import numpy as np

from adar import _fallback

try:
    from adar import _core
except ImportError:  # extension not built
    _core = None


def best_time(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def projection_case(draws, rng):
    d = 8
    A = rng.standard_normal((d, d))
    J = A @ A.T + d * np.eye(d)
    half = np.zeros(d, dtype=bool)
    half[4:7] = True
    zero = np.zeros(d, dtype=bool)
    zero[7] = True
    Z = rng.standard_normal((draws, d))
    return (Z, J, half, zero)


def recursion_case(n, rng):
    eta = rng.standard_normal(n)
    return (eta, 0.0, np.array([0.5, -0.3]), 1.0, np.array([0.1, 0.05, 0.0]), 1e150)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--draws", type=int, default=20_000, help="cone projections per batch")
    ap.add_argument("--n", type=int, default=100_000, help="length of the simulated recursion")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    cases = {
        "project_batch": projection_case(args.draws, rng),
        "simulate_recursion": recursion_case(args.n, rng),
    }
    if _core is None:
        print("compiled extension adar._core not available; timing the fallback only")
    print(f"{'kernel':<20} {'fallback s':>12} {'compiled s':>12} {'speedup':>9}  max abs diff")
    for name, case in cases.items():
        t_py, out_py = best_time(lambda: getattr(_fallback, name)(*case), args.repeat)
        if _core is None:
            print(f"{name:<20} {t_py:>12.4f} {'-':>12} {'-':>9}")
            continue
        t_c, out_c = best_time(lambda: getattr(_core, name)(*case), args.repeat)
        a = out_py[0] if isinstance(out_py, tuple) else out_py
        b = out_c[0] if isinstance(out_c, tuple) else out_c
        diff = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
        print(f"{name:<20} {t_py:>12.4f} {t_c:>12.4f} {t_py / t_c:>8.1f}x  {diff:.2e}")


if __name__ == "__main__":
    main()
