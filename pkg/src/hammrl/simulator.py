"""Bernstein-Vazirani outcome simulator with independent readout flips.

The ideal circuit returns the secret string with certainty, using one CNOT
per 1-bit of the secret. Noise is modeled as independent per-qubit bit
flips whose probability grows with the circuit's CNOT count, so denser
secrets are noisier. The full noisy outcome distribution is a product of
per-qubit factors and is computed analytically; shots are then drawn
multinomially with a per-circuit seed derived from (master seed, secret).
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass

import numpy as np

from .distribution import CountsMap, ProbDistribution, _load_json, _require
from .errors import CapacityError, InvalidInputError
from .hamming import BitString, DENSE_ENUMERATION_LIMIT

DEFAULT_SHOTS = 10240

# Flip probabilities are clamped here: beyond one half a "flip" is mostly
# a relabeling, not noise.
MAX_FLIP_PROB = 0.5


@dataclass(frozen=True)
class BvCircuitSpec:
    """One Bernstein-Vazirani instance, identified by its secret string."""

    secret: str

    def __post_init__(self):
        object.__setattr__(self, "secret", str(BitString(self.secret)))

    @property
    def n_qubits(self) -> int:
        return len(self.secret)

    @property
    def ones_count(self) -> int:
        return self.secret.count("1")

    @property
    def cnot_count(self) -> int:
        """One CNOT per 1-bit of the secret."""
        return self.ones_count

    @property
    def ideal_outcome(self) -> str:
        """Noise-free measurement: the secret itself, with certainty."""
        return self.secret


@dataclass(frozen=True)
class NoiseModel:
    """Independent per-qubit readout flips.

    The symmetric flip probability for a circuit with k CNOTs is
    base_flip_prob + k * per_cnot_flip_prob, clamped to [0, 0.5]. When
    ``asymmetry`` = (p01, p10) is set it overrides that path entirely:
    a qubit whose ideal bit is 0 flips with p01, a 1-bit with p10.
    ``seed`` is the master seed for shot sampling.
    """

    base_flip_prob: float = 0.0
    per_cnot_flip_prob: float = 0.0
    asymmetry: tuple[float, float] | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.base_flip_prob <= 1.0:
            raise InvalidInputError("base_flip_prob must be in [0, 1]")
        if not 0.0 <= self.per_cnot_flip_prob <= 1.0:
            raise InvalidInputError("per_cnot_flip_prob must be in [0, 1]")
        if self.asymmetry is not None:
            pair = tuple(float(p) for p in self.asymmetry)
            if len(pair) != 2 or not all(0.0 <= p <= 1.0 for p in pair):
                raise InvalidInputError("asymmetry must be a (p01, p10) pair in [0, 1]")
            object.__setattr__(self, "asymmetry", pair)
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InvalidInputError("seed must be an integer")

    def effective_flip_prob(self, cnot_count: int) -> float:
        """Symmetric per-qubit flip probability, clamped to [0, 0.5]."""
        raw = self.base_flip_prob + cnot_count * self.per_cnot_flip_prob
        return min(max(raw, 0.0), MAX_FLIP_PROB)

    def flip_probs_for(self, secret: str) -> list[float]:
        """Per-qubit flip probability, position-aligned with the secret."""
        if self.asymmetry is not None:
            p01, p10 = self.asymmetry
            return [p01 if bit == "0" else p10 for bit in secret]
        p = self.effective_flip_prob(secret.count("1"))
        return [p] * len(secret)

    def to_json_dict(self) -> dict:
        return {
            "base_flip_prob": self.base_flip_prob,
            "per_cnot_flip_prob": self.per_cnot_flip_prob,
            "asymmetry": None if self.asymmetry is None else list(self.asymmetry),
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, obj) -> "NoiseModel":
        _require(isinstance(obj, dict), "noise model must be a JSON object")
        asym = obj.get("asymmetry")
        return cls(
            base_flip_prob=float(obj.get("base_flip_prob", 0.0)),
            per_cnot_flip_prob=float(obj.get("per_cnot_flip_prob", 0.0)),
            asymmetry=None if asym is None else (float(asym[0]), float(asym[1])),
            seed=int(obj.get("seed", 0)),
        )


def analytic_noisy_distribution(spec: BvCircuitSpec,
                                noise: NoiseModel) -> ProbDistribution:
    """Exact noisy outcome distribution as a product of per-qubit factors."""
    n = spec.n_qubits
    if n > DENSE_ENUMERATION_LIMIT:
        raise CapacityError(
            f"analytic distribution over {n} qubits exceeds the dense "
            f"enumeration limit of {DENSE_ENUMERATION_LIMIT}"
        )
    flips = noise.flip_probs_for(spec.secret)
    vec = np.ones(1)
    for bit, f in zip(spec.secret, flips):
        # Outcome-ordered factor (P(outcome 0), P(outcome 1)) for this qubit.
        factor = np.array([1.0 - f, f]) if bit == "0" else np.array([f, 1.0 - f])
        vec = np.kron(vec, factor)
    width = f"0{n}b"
    probs = {format(idx, width): float(p) for idx, p in enumerate(vec) if p > 0.0}
    return ProbDistribution(probs, n_qubits=n)


def derive_circuit_seed(master_seed: int, secret: str) -> int:
    """Stable per-circuit seed from the master seed and the secret string."""
    digest = hashlib.sha256(f"{master_seed}|{secret}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "big")


def sample_counts(dist: ProbDistribution, shots: int, seed: int,
                  secret: str | None = None, label: str | None = None) -> CountsMap:
    """Multinomial shot sampling; outcomes that drew zero shots are dropped."""
    if shots < 1:
        raise InvalidInputError("shots must be >= 1")
    support = dist.support
    pvals = np.array([dist.probs[k] for k in support])
    pvals = pvals / pvals.sum()  # guard against accumulated rounding
    rng = np.random.default_rng(seed)
    draws = rng.multinomial(shots, pvals)
    counts = {k: int(c) for k, c in zip(support, draws) if c > 0}
    return CountsMap(counts, shots, n_qubits=dist.n_qubits,
                     secret=secret, label=label)


@dataclass(frozen=True)
class DatasetSpec:
    """All circuits whose secret has a fixed ones count at a fixed width."""

    n_qubits: int
    ones_count: int
    shots: int = DEFAULT_SHOTS
    noise: NoiseModel = NoiseModel()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidInputError("n_qubits must be >= 1")
        if not 0 <= self.ones_count <= self.n_qubits:
            raise InvalidInputError(
                f"ones_count {self.ones_count} outside 0..{self.n_qubits}"
            )
        if self.shots < 1:
            raise InvalidInputError("shots must be >= 1")

    @property
    def label(self) -> str:
        return dataset_label(self.n_qubits, self.ones_count)


def dataset_label(n_qubits: int, ones_count: int) -> str:
    return f"{n_qubits}q{ones_count}ones"


def secrets_with_ones(n_qubits: int, ones_count: int) -> list[BitString]:
    """All n-bit strings with the given ones count, lexicographically sorted."""
    out = []
    for positions in itertools.combinations(range(n_qubits), ones_count):
        chars = ["0"] * n_qubits
        for p in positions:
            chars[p] = "1"
        out.append(BitString("".join(chars)))
    return sorted(out)


def generate_dataset(spec: DatasetSpec) -> list[tuple[BvCircuitSpec, CountsMap]]:
    """Simulate every secret in the dataset.

    Each circuit samples with its own seed derived from (master seed,
    secret), so results do not depend on generation order.
    """
    out = []
    for secret in secrets_with_ones(spec.n_qubits, spec.ones_count):
        circuit = BvCircuitSpec(secret)
        dist = analytic_noisy_distribution(circuit, spec.noise)
        seed = derive_circuit_seed(spec.noise.seed, secret)
        counts = sample_counts(dist, spec.shots, seed,
                               secret=secret, label=spec.label)
        out.append((circuit, counts))
    return out


def counts_filename(secret: str) -> str:
    return f"counts_{secret}.json"


def manifest_dict(spec: DatasetSpec) -> dict:
    """Dataset manifest: parameters plus the counts file names, in order."""
    return {
        "n_qubits": spec.n_qubits,
        "ones_count": spec.ones_count,
        "shots": spec.shots,
        "noise": spec.noise.to_json_dict(),
        "master_seed": spec.noise.seed,
        "circuits": [
            counts_filename(s)
            for s in secrets_with_ones(spec.n_qubits, spec.ones_count)
        ],
    }


def load_manifest(path) -> dict:
    """Read and validate a dataset manifest."""
    obj = _load_json(path, "manifest")
    _require(isinstance(obj, dict), "manifest must be a JSON object")
    for field in ("n_qubits", "ones_count", "shots", "noise", "master_seed", "circuits"):
        _require(field in obj, f"manifest is missing field '{field}'")
    _require(isinstance(obj["circuits"], list) and obj["circuits"],
             "manifest field 'circuits' must be a non-empty list")
    _require(all(isinstance(name, str) for name in obj["circuits"]),
             "manifest field 'circuits' must list file names")
    NoiseModel.from_json_dict(obj["noise"])  # validates the noise block
    return obj
