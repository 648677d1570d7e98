"""Richardson-Lucy deconvolution over the Hamming state graph.

The measured distribution is treated as an ideal distribution blurred by a
point-spread function of Hamming distance. Iteration runs entirely on the
observed support (mass never leaks to unobserved strings):

    u^(0) = d
    c_i = sum_j w(h(i, j)) * u_j
    u_j <- u_j * sum_i (d_i / c_i) * w(h(i, j))

with both sums over the observed support, optionally truncated by a
distance cutoff. After the final iteration the estimate is normalized to a
probability distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import backend
from .distribution import ProbDistribution
from .errors import InvalidInputError, NumericalDegeneracyError
from .hamming import pack_bitstrings

DEFAULT_MAX_ITERATIONS = 100
DEFAULT_CONVERGENCE_TOL = 1e-8

_PSF_KINDS = ("reciprocal", "poisson", "binomial", "table")


class PointSpreadFunction:
    """Pair weight as a function of Hamming distance.

    Kinds:

    * ``reciprocal``: 1 / (distance + 1). The default; the self term is 1
      and weights decay harmonically with distance.
    * ``poisson``: Poisson pmf(distance; lam), for channels with a known
      expected flip count per shot.
    * ``binomial``: Binomial pmf(distance; trials, flip_prob), the exact
      independent-flip channel profile.
    * ``table``: explicit weights indexed by distance.

    The weight at distance zero must be positive: the self term anchors
    every denominator in the deconvolution.
    """

    __slots__ = ("kind", "lam", "trials", "flip_prob", "weights")

    def __init__(self, kind: str, *, lam: float | None = None,
                 trials: int | None = None, flip_prob: float | None = None,
                 weights: Sequence[float] | None = None):
        if kind not in _PSF_KINDS:
            raise InvalidInputError(
                f"unknown point-spread kind {kind!r}; expected one of {_PSF_KINDS}"
            )
        self.kind = kind
        self.lam = None
        self.trials = None
        self.flip_prob = None
        self.weights = None
        if kind == "poisson":
            if lam is None or not math.isfinite(lam) or lam <= 0:
                raise InvalidInputError("poisson point spread needs lam > 0")
            self.lam = float(lam)
        elif kind == "binomial":
            if trials is None or trials < 1:
                raise InvalidInputError("binomial point spread needs trials >= 1")
            if flip_prob is None or not 0.0 <= flip_prob < 1.0:
                raise InvalidInputError(
                    "binomial point spread needs 0 <= flip_prob < 1 "
                    "(at 1 the self term would vanish)"
                )
            self.trials = int(trials)
            self.flip_prob = float(flip_prob)
        elif kind == "table":
            if weights is None or len(weights) == 0:
                raise InvalidInputError("table point spread needs weights")
            table = tuple(float(w) for w in weights)
            for idx, w in enumerate(table):
                if not math.isfinite(w) or w < 0:
                    raise InvalidInputError(
                        f"table weight at distance {idx} must be finite and >= 0"
                    )
            if table[0] <= 0:
                raise InvalidInputError("table weight at distance 0 must be > 0")
            self.weights = table

    @classmethod
    def reciprocal(cls) -> "PointSpreadFunction":
        return cls("reciprocal")

    @classmethod
    def poisson(cls, lam: float) -> "PointSpreadFunction":
        return cls("poisson", lam=lam)

    @classmethod
    def binomial(cls, trials: int, flip_prob: float) -> "PointSpreadFunction":
        return cls("binomial", trials=trials, flip_prob=flip_prob)

    @classmethod
    def table(cls, weights: Sequence[float]) -> "PointSpreadFunction":
        return cls("table", weights=weights)

    def weight(self, distance: int) -> float:
        """Weight for a pair of outcomes at the given Hamming distance."""
        if distance < 0:
            raise InvalidInputError("distance must be >= 0")
        if self.kind == "reciprocal":
            return 1.0 / (distance + 1)
        if self.kind == "poisson":
            return math.exp(
                distance * math.log(self.lam) - self.lam - math.lgamma(distance + 1)
            )
        if self.kind == "binomial":
            if distance > self.trials:
                return 0.0
            return (
                math.comb(self.trials, distance)
                * self.flip_prob ** distance
                * (1.0 - self.flip_prob) ** (self.trials - distance)
            )
        if distance >= len(self.weights):
            raise InvalidInputError(
                f"distance {distance} outside table of length {len(self.weights)}"
            )
        return self.weights[distance]

    def weight_table(self, max_distance: int) -> np.ndarray:
        """Weights for distances 0..max_distance as a float64 array."""
        return np.array([self.weight(t) for t in range(max_distance + 1)])

    def spec_string(self) -> str:
        """Canonical text form accepted back by ``from_spec``."""
        if self.kind == "reciprocal":
            return "reciprocal"
        if self.kind == "poisson":
            return f"poisson:{self.lam!r}"
        if self.kind == "binomial":
            return f"binomial:{self.trials}:{self.flip_prob!r}"
        return "table:" + ",".join(repr(w) for w in self.weights)

    @classmethod
    def from_spec(cls, spec) -> "PointSpreadFunction":
        """Parse ``reciprocal`` / ``poisson:L`` / ``binomial:N:P`` /
        ``table:w0,w1,...`` or the equivalent JSON object form."""
        if isinstance(spec, PointSpreadFunction):
            return spec
        if isinstance(spec, Mapping):
            return cls._from_mapping(spec)
        if not isinstance(spec, str):
            raise InvalidInputError(f"cannot parse point spread from {spec!r}")
        head, _, rest = spec.partition(":")
        try:
            if head == "reciprocal":
                if rest:
                    raise InvalidInputError("reciprocal takes no parameters")
                return cls.reciprocal()
            if head == "poisson":
                return cls.poisson(float(rest))
            if head == "binomial":
                trials_text, _, prob_text = rest.partition(":")
                return cls.binomial(int(trials_text), float(prob_text))
            if head == "table":
                return cls.table([float(w) for w in rest.split(",")])
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"bad point-spread spec {spec!r}: {exc}") from exc
        raise InvalidInputError(f"unknown point-spread spec {spec!r}")

    @classmethod
    def _from_mapping(cls, obj: Mapping) -> "PointSpreadFunction":
        kind = obj.get("kind")
        try:
            if kind == "reciprocal":
                return cls.reciprocal()
            if kind == "poisson":
                return cls.poisson(float(obj.get("lambda", obj.get("lam"))))
            if kind == "binomial":
                return cls.binomial(
                    int(obj.get("trials", obj.get("n"))),
                    float(obj.get("flip_prob", obj.get("p"))),
                )
            if kind == "table":
                return cls.table([float(w) for w in obj["weights"]])
        except (TypeError, ValueError, KeyError) as exc:
            raise InvalidInputError(f"bad point-spread spec {obj!r}: {exc}") from exc
        raise InvalidInputError(f"unknown point-spread kind {kind!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSpreadFunction):
            return NotImplemented
        return (self.kind, self.lam, self.trials, self.flip_prob, self.weights) == (
            other.kind, other.lam, other.trials, other.flip_prob, other.weights
        )

    def __repr__(self) -> str:
        return f"PointSpreadFunction({self.spec_string()!r})"


def psf_weight(psf: PointSpreadFunction, distance: int) -> float:
    """Module-level alias for ``psf.weight(distance)``."""
    return psf.weight(distance)


@dataclass(frozen=True)
class DeconvolutionConfig:
    """Iteration controls.

    distance_cutoff=None sums over the whole observed support; an integer
    cutoff zeroes weights beyond that distance (useful at high qubit
    counts). include_self=False removes the distance-0 term from both sums.
    """

    max_iterations: int = DEFAULT_MAX_ITERATIONS
    convergence_tol: float = DEFAULT_CONVERGENCE_TOL
    distance_cutoff: int | None = None
    include_self: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidInputError("max_iterations must be >= 1")
        if not (math.isfinite(self.convergence_tol) and self.convergence_tol > 0):
            raise InvalidInputError("convergence_tol must be > 0")
        if self.distance_cutoff is not None and self.distance_cutoff < 1:
            raise InvalidInputError("distance_cutoff must be >= 1 when set")


@dataclass
class DeconvolutionResult:
    mitigated: ProbDistribution
    iterations_run: int
    converged: bool
    l1_history: list[float] = field(default_factory=list)


def _effective_table(psf: PointSpreadFunction, n_qubits: int,
                     config: DeconvolutionConfig) -> np.ndarray:
    if config.distance_cutoff is not None and config.distance_cutoff > n_qubits:
        raise InvalidInputError(
            f"distance_cutoff {config.distance_cutoff} exceeds "
            f"qubit count {n_qubits}"
        )
    table = psf.weight_table(n_qubits)
    if not config.include_self:
        table[0] = 0.0
    if config.distance_cutoff is not None:
        table[config.distance_cutoff + 1:] = 0.0
    return table


def _operator_for(dist: ProbDistribution, psf: PointSpreadFunction,
                  config: DeconvolutionConfig):
    support = dist.support
    table = _effective_table(psf, dist.n_qubits, config)
    packed = pack_bitstrings(support, dist.n_qubits)
    apply = backend.pairwise_operator(packed, table)
    observed = np.array([dist.probs[k] for k in support])
    return support, apply, observed


def _blur_or_raise(apply, u: np.ndarray, support, iteration: int) -> np.ndarray:
    c = apply(u)
    zero = np.flatnonzero(c == 0.0)
    if zero.size:
        raise NumericalDegeneracyError(support[int(zero[0])], iteration)
    return c


def richardson_lucy(dist: ProbDistribution,
                    psf: PointSpreadFunction | None = None,
                    config: DeconvolutionConfig | None = None) -> DeconvolutionResult:
    """Deconvolve a measured distribution on its observed support.

    Starts from the measured values, iterates until the L1 change between
    successive estimates drops below ``convergence_tol`` or
    ``max_iterations`` is reached, then normalizes.
    """
    psf = psf if psf is not None else PointSpreadFunction.reciprocal()
    config = config if config is not None else DeconvolutionConfig()
    support, apply, observed = _operator_for(dist, psf, config)

    u = observed.copy()
    l1_history: list[float] = []
    converged = False
    iterations = 0
    for _ in range(config.max_iterations):
        c = _blur_or_raise(apply, u, support, iterations + 1)
        u_next = u * apply(observed / c)
        iterations += 1
        l1 = float(np.abs(u_next - u).sum())
        l1_history.append(l1)
        u = u_next
        if l1 < config.convergence_tol:
            converged = True
            break

    mitigated = ProbDistribution.from_weights(
        dict(zip(support, (float(v) for v in u))), n_qubits=dist.n_qubits
    )
    return DeconvolutionResult(mitigated, iterations, converged, l1_history)


def rl_single_iteration(estimate: Mapping[str, float], dist: ProbDistribution,
                        psf: PointSpreadFunction | None = None,
                        config: DeconvolutionConfig | None = None) -> dict[str, float]:
    """One unnormalized update step from an explicit current estimate.

    The estimate must live on exactly the observed support of ``dist``.
    """
    psf = psf if psf is not None else PointSpreadFunction.reciprocal()
    config = config if config is not None else DeconvolutionConfig()
    if set(estimate) != set(dist.probs):
        raise InvalidInputError("estimate and distribution must share support")
    support, apply, observed = _operator_for(dist, psf, config)
    u = np.array([float(estimate[k]) for k in support])
    c = _blur_or_raise(apply, u, support, 1)
    u_next = u * apply(observed / c)
    return {k: float(v) for k, v in zip(support, u_next)}
