"""Compare the numba and numpy kernels on representative inputs.

    python3 benchmarks/bench_kernels.py [--repeat N]

Prints one line per kernel: best-of-N wall time for each backend and the
max absolute difference between their outputs.
"""

import argparse
import timeit

import numpy as np

from facloc import kernels as K
from facloc.distribution import build_system


def cases(rng):
    xs = np.sort(rng.uniform(0, 1000, 2000))
    A = build_system(40.5, np.sort(rng.uniform(0.1, 5, 12))[::-1])
    d = A[1:] - A[:-1]
    M = np.ascontiguousarray(np.concatenate((d[:, 1:], d[:, :1]), axis=1))
    kappa = rng.uniform(0.1, 10, 200)
    F = rng.uniform(0, 100, (80, 5))
    P = rng.uniform(0, 100, 10)
    return {
        "greedy_starts": ((xs, 3.0), K.greedy_starts_jit, K.greedy_starts_numpy),
        "nullspace_pair": ((M,), K.nullspace_pair_jit, K.nullspace_pair_numpy),
        "loser_probs": ((kappa,), K.loser_probs_jit, K.loser_probs_numpy),
        "nearest_distances": ((F, P), K.nearest_distances_jit, K.nearest_distances_numpy),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--number", type=int, default=200)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'numba us':>12}{'numpy us':>12}{'speedup':>10}{'max diff':>12}")
    for name, (inputs, jit, ref) in cases(rng).items():
        jit(*inputs)  # compile outside the timing
        tj = min(timeit.repeat(lambda: jit(*inputs), number=args.number, repeat=args.repeat)) / args.number
        tn = min(timeit.repeat(lambda: ref(*inputs), number=args.number, repeat=args.repeat)) / args.number
        a, b = np.asarray(jit(*inputs)), np.asarray(ref(*inputs))
        diff = float(np.abs(a - b).max()) if a.shape == b.shape else float("nan")
        print(f"{name:<20}{tj * 1e6:>12.1f}{tn * 1e6:>12.1f}{tn / tj:>10.1f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
