"""Time the numba kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--scale 1.0] [--repeat 3]

Each workload runs once per backend untimed (numba compilation, caches),
then ``--repeat`` timed runs; the best time is reported.
"""

from __future__ import annotations

import argparse
import time
from fractions import Fraction

import numpy as np

from fareyflow._backend import HAVE_NUMBA, use_backend
from fareyflow.congruence import den_congruent
from fareyflow.est import ESTConfig, est_lambda, est_limit_section_mc
from fareyflow.section import mc_return_times, w_point_returns
from fareyflow.stream import collect_gaps, count_subset


def workloads(scale: float):
    Q = int(3000 * scale ** 0.5)
    M3 = den_congruent(3, 1)
    n_mc = int(200_000 * scale)
    return [
        (f"count F(Q), Q={Q}", lambda: count_subset(Q)),
        (f"collect F_M(Q), m=3, Q={Q}", lambda: collect_gaps(Q, None, M3)),
        (f"MC return times, m=6, n={n_mc}",
         lambda: mc_return_times(den_congruent(6, 1), n_mc, np.random.default_rng(0))),
        ("exact W-point returns, m=4, Q=200", lambda: w_point_returns(200, den_congruent(4, 1))),
        (f"EST measure, n={Q // 3}", lambda: est_lambda(ESTConfig(Q // 3, Fraction(1, 100), 2))),
        (f"EST section MC, K=2, n={n_mc // 2}",
         lambda: est_limit_section_mc(Fraction(1, 2), 2, M3, 2, n_mc // 2, np.random.default_rng(0))),
    ]


def best_of(fn, repeat: int) -> float:
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    names = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    print(f"{'workload':42s} " + " ".join(f"{n:>10s}" for n in names) + "   speedup")
    for label, fn in workloads(args.scale):
        row = {}
        for name in names:
            with use_backend(name):
                row[name] = best_of(fn, args.repeat)
        speed = row["numpy"] / row["numba"] if "numba" in row else float("nan")
        print(f"{label:42s} " + " ".join(f"{row[n]:9.3f}s" for n in names) + f"   {speed:6.1f}x")


if __name__ == "__main__":
    main()
