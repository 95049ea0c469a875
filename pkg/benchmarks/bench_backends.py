"""Time the compiled and pure-numpy replication kernels on the same workload.

    python benchmarks/bench_backends.py --horizon 20000 --reps 64

Both backends consume identical random streams, so the script also checks
that they produce the same pull counts and regrets.
"""
import argparse
import time

import numpy as np

from gauss_ts import HAS_NUMBA, Environment, PolicySpec, run_replications


def timed(backend, env, policy, horizon, reps, seed, repeat):
    best = np.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = run_replications(env, policy, horizon, reps, seed, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--horizon", type=int, default=20_000)
    p.add_argument("--reps", type=int, default=64)
    p.add_argument("--arms", type=int, default=3)
    p.add_argument("--alpha", type=float, default=-0.5)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args(argv)

    mus = -np.arange(args.arms, dtype=float)
    env = Environment.from_params(mus, np.ones(args.arms))
    policy = PolicySpec.thompson(args.alpha)
    steps = args.horizon * args.reps
    print(f"K={args.arms} T={args.horizon} reps={args.reps} ({steps:,} steps)")

    results = {}
    backends = ["numba", "numpy"] if HAS_NUMBA else ["numpy"]
    for backend in backends:
        if backend == "numba":
            # compile outside the timed region
            run_replications(env, policy, 100, 1, 0, backend="numba")
        secs, res = timed(backend, env, policy, args.horizon, args.reps, args.seed, args.repeat)
        results[backend] = (secs, res)
        print(f"{backend:>6}: {secs:8.3f} s  {1e9 * secs / steps:8.1f} ns/step")

    if len(results) == 2:
        (t_nb, r_nb), (t_np, r_np) = results["numba"], results["numpy"]
        same_pulls = np.array_equal(r_nb.pulls, r_np.pulls)
        max_diff = float(np.max(np.abs(r_nb.regret - r_np.regret)))
        print(f"speedup: {t_np / t_nb:.1f}x   identical pulls: {same_pulls}   max regret diff: {max_diff:.3g}")
    else:
        print("numba unavailable (or disabled via GAUSS_TS_DISABLE_NUMBA); numpy only")


if __name__ == "__main__":
    main()
