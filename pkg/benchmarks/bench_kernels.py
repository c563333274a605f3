"""Compare the compiled (numba) and pure-numpy kernel backends.

The backend is chosen at import time from the SPLICE_NUMBA environment
variable, so this script re-runs itself in a subprocess for each setting
and reports per-kernel timings plus an end-to-end path trace.

Usage: python benchmarks/bench_kernels.py
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def build_problem(n=800, p=20, seed=0):
    from splice.estimator import build_symmetric_design
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    d2 = np.einsum("ij,ij->j", x, x) / n
    return build_symmetric_design(x, d2)


def bench(fn, reps=50):
    fn()                                    # warm up (jit compilation)
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def run_current_backend():
    from splice._kernels import BACKEND
    from splice.homotopy import WeightedLassoProblem, trace_path

    design = build_problem()
    z = design.z
    q = z.n_cols
    b = np.random.default_rng(1).standard_normal(q)
    v = z.matvec(b)
    cols = np.arange(0, q, 3, dtype=np.int64)

    results = {"backend": BACKEND}
    results["matvec_ms"] = 1e3 * bench(lambda: z.matvec(b))
    results["rmatvec_ms"] = 1e3 * bench(lambda: z.rmatvec(v))
    results["subset_matvec_ms"] = 1e3 * bench(
        lambda: z.subset_matvec(cols, b[cols]))
    results["column_dots_ms"] = 1e3 * bench(lambda: z.column_dots(0, cols))

    problem = WeightedLassoProblem(z, design.y, design.weights)
    t0 = time.perf_counter()
    path = trace_path(problem)
    results["trace_path_s"] = time.perf_counter() - t0
    results["breakpoints"] = len(path.breakpoints)
    return results


def main():
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(run_current_backend()))
        return

    rows = []
    for flag in ("1", "0"):
        env = dict(os.environ, SPLICE_NUMBA=flag, _BENCH_CHILD="1")
        out = subprocess.run([sys.executable, os.path.abspath(__file__)],
                             env=env, capture_output=True, text=True, check=True)
        rows.append(json.loads(out.stdout.strip().splitlines()[-1]))

    keys = ["matvec_ms", "rmatvec_ms", "subset_matvec_ms", "column_dots_ms",
            "trace_path_s"]
    print(f"{'kernel':<20}" + "".join(f"{r['backend']:>12}" for r in rows)
          + f"{'speedup':>10}")
    for k in keys:
        a, b = rows[0][k], rows[1][k]
        print(f"{k:<20}{a:>12.4f}{b:>12.4f}{b / a:>10.2f}x")
    print(f"(path breakpoints: {rows[0]['breakpoints']})")


if __name__ == "__main__":
    main()
