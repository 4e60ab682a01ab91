"""Compare the compiled stencil kernel with the numpy fallback.

Times ``shift_rows`` from both backends on the 400 x 200 snapshot size used by
the synthetic benchmarks, for lattice (permutation) and off-lattice
(six-point interpolation) shifts, and optionally one JFB solve under each
backend.

Usage::

    python benchmarks/bench_transport.py [--repeat 50] [--solver]
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from robust_spod import _pykernels
from robust_spod.transport import SpatialGrid, TransportOperator

try:
    from robust_spod import _ckernels
except ImportError:
    _ckernels = None

SOLVER_SNIPPET = """
import time
from robust_spod import SolverConfig, SpodProblem, generate, solve
from robust_spod._backend import BACKEND
snap, ops, _ = generate("multilinear")
p = SpodProblem(snap, ops, noise_enabled=False)
t = time.perf_counter()
dec, _ = solve(p, SolverConfig("jfb", lambdas=0.3, lambda_noise=0.0, step_alpha=0.5, max_iter={iters}))
print(BACKEND, time.perf_counter() - t)
"""


def operator_case(kind, m=400, n=200):
    grid = SpatialGrid.from_interval(-0.5, 0.5, m)
    t = np.arange(n) / n * 0.5
    shifts = t if kind == "lattice" else 0.25 * np.cos(7 * np.pi * t)
    return TransportOperator(shifts, grid)


def time_kernel(kernel, op, values, repeat):
    rows = np.ascontiguousarray(values.T)
    base, weights = op._base, op._weights
    return min(timeit.repeat(lambda: kernel.shift_rows(rows, base, weights), number=1,
                             repeat=repeat))


def run_solver(pure, iters):
    env = dict(os.environ, ROBUST_SPOD_PURE="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", SOLVER_SNIPPET.format(iters=iters)], env=env,
                         capture_output=True, text=True, check=True).stdout.split()
    return out[0], float(out[1])


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=50)
    parser.add_argument("--solver", action="store_true", help="also time 100 JFB iterations")
    args = parser.parse_args(argv)

    values = np.random.default_rng(0).standard_normal((400, 200))
    print(f"{'case':<12} {'numpy [ms]':>11} {'cython [ms]':>12} {'speedup':>8}")
    for kind in ("lattice", "off-lattice"):
        op = operator_case(kind)
        t_py = time_kernel(_pykernels, op, values, args.repeat)
        if _ckernels is None:
            print(f"{kind:<12} {1e3 * t_py:>11.3f} {'n/a':>12} {'n/a':>8}")
            continue
        t_c = time_kernel(_ckernels, op, values, args.repeat)
        print(f"{kind:<12} {1e3 * t_py:>11.3f} {1e3 * t_c:>12.3f} {t_py / t_c:>7.1f}x")

    if args.solver:
        for pure in (True, False):
            backend, seconds = run_solver(pure, 100)
            print(f"JFB 100 iterations, {backend} backend: {seconds:.2f} s")


if __name__ == "__main__":
    main()
