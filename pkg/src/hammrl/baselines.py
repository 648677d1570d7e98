"""Neighborhood-scoring baselines: HAMMER and a Poisson-weighted variant.

Both score each observed outcome by accumulating the probability of
lower-probability outcomes in Hamming shells around it, then multiply by
the outcome's own probability and renormalize. They differ only in the
per-shell weight: HAMMER uses the reciprocal of the shell's total observed
probability, the Poisson variant a Poisson pmf of the shell distance
(a simplified stand-in for hardware-calibrated transition weighting).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import backend
from .deconv import PointSpreadFunction
from .distribution import ProbDistribution
from .errors import InvalidInputError
from .hamming import pack_bitstrings


def score_distance_bound(n_qubits: int) -> int:
    """Largest shell distance included in the scores: floor(N/2), minimum 1."""
    return max(1, n_qubits // 2)


@dataclass(frozen=True)
class HammerScore:
    """Per-outcome scoring intermediates, indexed by shell distance 0..bound."""

    chs: tuple[float, ...]      # total observed probability per shell
    weights: tuple[float, ...]  # 1/chs where nonzero, else 0
    score: float
    likelihood: float


@dataclass(frozen=True)
class PoissonBaselineConfig:
    """lam is the expected number of flipped bits per shot."""

    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InvalidInputError("lam must be finite and > 0")


def _shell_tables(dist: ProbDistribution):
    support = dist.support
    probs = np.array([dist.probs[k] for k in support])
    packed = pack_bitstrings(support, dist.n_qubits)
    n_buckets = dist.n_qubits + 1
    shell = backend.bucket_sums(packed, probs, n_buckets)
    lower = backend.bucket_sums_filtered(packed, probs, probs, n_buckets)
    return support, probs, shell, lower


def hammer_scores(dist: ProbDistribution) -> dict[str, HammerScore]:
    """All scoring intermediates for every observed outcome.

    chs[i] sums Pr(y) over outcomes y at distance exactly i (the self term
    sits at i=0); only strictly lower-probability outcomes count toward the
    score, so equal-probability pairs never boost each other.
    """
    support, probs, shell, lower = _shell_tables(dist)
    bound = score_distance_bound(dist.n_qubits)
    inv = np.zeros_like(shell)
    nonzero = shell != 0.0
    inv[nonzero] = 1.0 / shell[nonzero]
    scores = (inv[:, 1:bound + 1] * lower[:, 1:bound + 1]).sum(axis=1)
    likelihoods = scores * probs
    out: dict[str, HammerScore] = {}
    for row, key in enumerate(support):
        out[key] = HammerScore(
            chs=tuple(float(v) for v in shell[row, :bound + 1]),
            weights=tuple(float(v) for v in inv[row, :bound + 1]),
            score=float(scores[row]),
            likelihood=float(likelihoods[row]),
        )
    return out


def hammer_mitigate(dist: ProbDistribution) -> ProbDistribution:
    """Rescale by HAMMER likelihoods; if every likelihood is zero (no
    outcome has a lower-probability neighbor in range), the input is
    returned unchanged."""
    scores = hammer_scores(dist)
    likelihood = {k: s.likelihood for k, s in scores.items()}
    if not any(v > 0.0 for v in likelihood.values()):
        return dist
    return ProbDistribution.from_weights(likelihood, n_qubits=dist.n_qubits)


def poisson_mitigate(dist: ProbDistribution,
                     config: PoissonBaselineConfig) -> ProbDistribution:
    """HAMMER pipeline with Poisson shell weights instead of 1/chs."""
    support, probs, _, lower = _shell_tables(dist)
    bound = score_distance_bound(dist.n_qubits)
    pmf = PointSpreadFunction.poisson(config.lam).weight_table(dist.n_qubits)
    scores = (lower[:, 1:bound + 1] * pmf[None, 1:bound + 1]).sum(axis=1)
    likelihood = scores * probs
    if not np.any(likelihood > 0.0):
        return dist
    return ProbDistribution.from_weights(
        dict(zip(support, (float(v) for v in likelihood))),
        n_qubits=dist.n_qubits,
    )
