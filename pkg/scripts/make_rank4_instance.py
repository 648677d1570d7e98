#!/usr/bin/env python3
"""Search for the committed nine-qubit rank-recovery instance.

Scans symmetric flip probabilities and sampling seeds for an all-ones
nine-qubit circuit until the sampled counts place the secret at rank 4
before mitigation and deconvolution promotes it to rank 1 within 100
iterations. The found counts are verified against a straight-line
dict-and-loop deconvolution written here (independent of the package
kernels) and then written to data/nine_qubit_rank4_instance.json.

Usage: python3 scripts/make_rank4_instance.py [out_path]
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from hammrl import _jsontext
from hammrl.deconv import richardson_lucy
from hammrl.distribution import CountsMap, from_counts, rank_of
from hammrl.simulator import (
    BvCircuitSpec,
    NoiseModel,
    analytic_noisy_distribution,
    sample_counts,
)

SECRET = "111111111"
SHOTS = 10240


def slow_deconvolve(observed: dict[str, float], iterations: int) -> dict[str, float]:
    """Straight-line reciprocal-weight deconvolution for verification."""
    keys = sorted(observed)

    def weight(x, y):
        return 1.0 / (sum(a != b for a, b in zip(x, y)) + 1)

    u = dict(observed)
    for _ in range(iterations):
        c = {i: sum(weight(i, j) * u[j] for j in keys) for i in keys}
        nxt = {
            j: u[j] * sum(observed[i] / c[i] * weight(i, j) for i in keys)
            for j in keys
        }
        drift = sum(abs(nxt[k] - u[k]) for k in keys)
        u = nxt
        if drift < 1e-8:
            break
    total = sum(u.values())
    return {k: v / total for k, v in u.items()}


def slow_rank(probs: dict[str, float], target: str) -> int:
    p = probs.get(target, 0.0)
    return 1 + sum(1 for v in probs.values() if v > p)


def search() -> tuple[CountsMap, float, int]:
    for p_milli in range(455, 495, 5):
        p_eff = p_milli / 1000.0
        noise = NoiseModel(base_flip_prob=p_eff)
        dist = analytic_noisy_distribution(BvCircuitSpec(SECRET), noise)
        for seed in range(200):
            counts = sample_counts(dist, SHOTS, seed, secret=SECRET)
            measured = from_counts(counts)
            if rank_of(measured, SECRET) != 4:
                continue
            result = richardson_lucy(measured)
            if rank_of(result.mitigated, SECRET) != 1:
                continue
            # Independent straight-line check before accepting.
            slow = slow_deconvolve(dict(measured.probs), 100)
            if slow_rank(slow, SECRET) != 1:
                continue
            if slow_rank(dict(measured.probs), SECRET) != 4:
                continue
            return counts, p_eff, seed
    raise SystemExit("no instance found in the scanned grid")


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent
        / "data" / "nine_qubit_rank4_instance.json"
    )
    counts, p_eff, seed = search()
    counts.label = (
        f"nine-qubit all-ones circuit, symmetric flip {p_eff}, "
        f"sampling seed {seed}, secret rank 4 before mitigation"
    )
    out.parent.mkdir(parents=True, exist_ok=True)
    _jsontext.dump(out, counts.to_json_dict())
    measured = from_counts(counts)
    promoted = richardson_lucy(measured)
    print(f"p_eff={p_eff} seed={seed} support={len(counts.counts)}")
    print(f"rank before: {rank_of(measured, SECRET)}")
    print(f"rank after:  {rank_of(promoted.mitigated, SECRET)} "
          f"({promoted.iterations_run} iterations)")
    print(f"P(secret): {measured.probs[SECRET]:.4f} -> "
          f"{promoted.mitigated.probs[SECRET]:.4f}")
    print(f"wrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
