"""Time the compiled accumulation kernel against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat N]

Runs synthetic workloads sized like the Gamma-series sums (terms x nilpotent
multi-indices), then a full series evaluation on a bundled fixture with each
backend.
"""

import argparse
import timeit

import numpy as np

from bbgkz import _kernels_py, gamma_series
from bbgkz.cohomology import Cohomology
from bbgkz.fixtures import load_fixture
from bbgkz.geometry import points_of_degree_at_most
from bbgkz.triangulation import convergence_basepoint

try:
    from bbgkz._kernels import accumulate_terms as compiled
except ImportError:
    compiled = None


def synthetic(T, n, K, M, seed=0):
    rng = np.random.default_rng(seed)
    weights = rng.normal(size=T) + 1j * rng.normal(size=T)
    coeffs = rng.normal(size=(T, n, K + 1))
    multi = rng.integers(0, K + 1, size=(M, n)).astype(np.int64)
    return weights, coeffs, multi


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def series_workload(accumulate, fixture="rank2_n4", heights="fine", bound=8):
    gamma_series.accumulate_terms = accumulate
    tri = load_fixture(fixture).triangulation(heights)
    gs = gamma_series.GammaSeries(Cohomology(tri), gamma_series.SeriesTruncation(bound=bound))
    x = convergence_basepoint(tri, 5.0, [0.2] * tri.cone.n)
    pts = points_of_degree_at_most(tri.cone, 2)

    def run():
        for c in pts:
            gs.eval_gamma(c, x)

    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if compiled is None:
        print("compiled kernel not built; only the fallback is available")
    backends = [("numpy", _kernels_py.accumulate_terms)] + ([("cython", compiled)] if compiled else [])

    print(f"{'workload':<28}" + "".join(f"{name:>12}" for name, _ in backends) + f"{'speedup':>10}")
    for T, n, K, M in [(50, 3, 2, 10), (400, 4, 3, 35), (2000, 4, 3, 35), (5000, 6, 2, 28)]:
        w, cf, mi = synthetic(T, n, K, M)
        times = [best_of(lambda f=f: f(w, cf, mi), args.repeat) for _, f in backends]
        label = f"T={T} n={n} K={K} M={M}"
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
        print(f"{label:<28}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times) + speed)

    original = gamma_series.accumulate_terms
    try:
        times = []
        for _, f in backends:
            run = series_workload(f)
            run()  # warm the enumeration caches
            times.append(best_of(run, args.repeat))
        speed = f"{times[0] / times[-1]:>9.1f}x" if len(times) > 1 else ""
        print(f"{'rank2_n4 series, deg<=2':<28}" + "".join(f"{t * 1e3:>10.3f}ms" for t in times) + speed)
    finally:
        gamma_series.accumulate_terms = original


if __name__ == "__main__":
    main()
