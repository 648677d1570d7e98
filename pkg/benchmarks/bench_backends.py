#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Times the pairwise distance matrix and a fixed-iteration deconvolution at
several support sizes, then prints per-backend timings with the speedup of
the compiled extension over the NumPy fallback.

Usage: python3 benchmarks/bench_backends.py [--iterations 50] [--repeats 3]
"""

import argparse
import random
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hammrl import backend
from hammrl.deconv import DeconvolutionConfig, richardson_lucy
from hammrl.distribution import ProbDistribution
from hammrl.errors import CapacityError
from hammrl.hamming import pack_bitstrings

CASES = [
    (10, 128),
    (10, 512),
    (12, 1024),
    (14, 2048),
]

# support too large for the fallback's dense weight matrix; the compiled
# backend still runs (cached int16 distances, or streaming popcounts)
EDGE_CASE = (16, 16384)


def random_support(rng, n_qubits, size):
    keys = rng.sample(range(2 ** n_qubits), size)
    return [format(v, f"0{n_qubits}b") for v in keys]


def best_of(repeats, fn):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_distance(keys, n_qubits, repeats):
    packed = pack_bitstrings(keys, n_qubits)
    out = {}
    for name in backend.available_backends():
        with backend.use_backend(name):
            try:
                out[name] = best_of(
                    repeats, lambda: backend.distance_matrix(packed)
                )
            except CapacityError:
                out[name] = None
    return out


def bench_deconvolution(keys, iterations, repeats):
    rng = random.Random(1234)
    weights = [rng.random() + 1e-3 for _ in keys]
    total = sum(weights)
    dist = ProbDistribution({k: w / total for k, w in zip(keys, weights)})
    # tiny tolerance so every run does the full iteration count
    config = DeconvolutionConfig(max_iterations=iterations,
                                 convergence_tol=1e-300)
    out = {}
    for name in backend.available_backends():
        with backend.use_backend(name):
            try:
                out[name] = best_of(
                    repeats, lambda: richardson_lucy(dist, config=config)
                )
            except CapacityError:
                out[name] = None
    return out


def fmt_row(label, timings):
    compiled = timings.get("compiled")
    python = timings.get("python")
    cells = [f"{label:<28}"]
    for name in ("compiled", "python"):
        if name not in timings:
            cells.append(f"{'n/a':>13}")
        elif timings[name] is None:
            cells.append(f"{'capacity':>13}")
        else:
            cells.append(f"{timings[name] * 1e3:>10.2f} ms")
    if compiled is not None and python is not None:
        cells.append(f"{python / compiled:>7.1f}x")
    else:
        cells.append(f"{'n/a':>8}")
    return "  ".join(cells)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=50)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    names = backend.available_backends()
    print(f"backends available: {', '.join(names)}")
    if "compiled" not in names:
        print("compiled extension not built; timing the fallback only")
    header = f"{'case':<28}  {'compiled':>13}  {'python':>13}  {'speedup':>8}"
    print(header)
    print("-" * len(header))

    rng = random.Random(20250815)
    for n_qubits, size in CASES:
        keys = random_support(rng, n_qubits, size)
        dist_times = bench_distance(keys, n_qubits, args.repeats)
        print(fmt_row(f"distances {n_qubits}q M={size}", dist_times))
        rl_times = bench_deconvolution(keys, args.iterations, args.repeats)
        print(fmt_row(
            f"deconv x{args.iterations} {n_qubits}q M={size}", rl_times
        ))

    n_qubits, size = EDGE_CASE
    keys = random_support(rng, n_qubits, size)
    edge_times = bench_deconvolution(keys, 10, repeats=1)
    print(fmt_row(f"deconv x10 {n_qubits}q M={size}", edge_times))
    return 0


if __name__ == "__main__":
    sys.exit(main())
