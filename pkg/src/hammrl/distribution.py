"""Counts ingestion, probability distributions, and the outcome state graph.

Only observed outcomes are represented: distributions are sparse maps from
bitstring to strictly positive probability, and the state graph's nodes are
exactly the observed strings, with edges joining pairs at Hamming distance
one.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Mapping

from . import _jsontext
from .errors import InvalidInputError
from .hamming import BitString

# Probability mass must agree with 1 to within this before a distribution
# is accepted or emitted.
PROB_SUM_TOLERANCE = 1e-9


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidInputError(message)


def _validated_length(keys, n_qubits: int | None) -> int:
    length = n_qubits
    for key in keys:
        b = BitString(key)
        if length is None:
            length = len(b)
        elif len(b) != length:
            raise InvalidInputError(
                f"outcome {str(key)!r} has {len(b)} bits, expected {length}"
            )
    assert length is not None
    return length


class CountsMap:
    """Raw measurement counts for one circuit execution."""

    __slots__ = ("counts", "shots", "n_qubits", "secret", "label")

    def __init__(self, counts: Mapping[str, int], shots: int,
                 n_qubits: int | None = None, secret: str | None = None,
                 label: str | None = None):
        _require(bool(counts), "counts must be non-empty")
        _require(isinstance(shots, int) and not isinstance(shots, bool) and shots > 0,
                 "shots must be a positive integer")
        length = _validated_length(counts.keys(), n_qubits)
        for key, value in counts.items():
            _require(isinstance(value, int) and not isinstance(value, bool) and value >= 1,
                     f"count for {str(key)!r} must be an integer >= 1")
        total = sum(counts.values())
        _require(total <= shots,
                 f"counts total {total} exceeds shots {shots}")
        if secret is not None:
            secret = BitString(secret)
            _require(len(secret) == length,
                     f"secret has {len(secret)} bits, expected {length}")
        self.counts = {str(k): int(v) for k, v in counts.items()}
        self.shots = shots
        self.n_qubits = length
        self.secret = str(secret) if secret is not None else None
        self.label = label

    @property
    def total_counts(self) -> int:
        return sum(self.counts.values())

    def to_json_dict(self) -> dict:
        out: dict = {
            "n_qubits": self.n_qubits,
            "shots": self.shots,
            "counts": {k: self.counts[k] for k in sorted(self.counts)},
        }
        if self.secret is not None:
            out["secret"] = self.secret
        if self.label is not None:
            out["label"] = self.label
        return out

    @classmethod
    def from_json_dict(cls, obj) -> "CountsMap":
        _require(isinstance(obj, dict), "counts file must be a JSON object")
        for field in ("n_qubits", "shots", "counts"):
            _require(field in obj, f"counts file is missing field '{field}'")
        _require(isinstance(obj["n_qubits"], int) and not isinstance(obj["n_qubits"], bool),
                 "counts file field 'n_qubits' must be an integer")
        _require(isinstance(obj["shots"], int) and not isinstance(obj["shots"], bool),
                 "counts file field 'shots' must be an integer")
        _require(isinstance(obj["counts"], dict),
                 "counts file field 'counts' must be an object")
        secret = obj.get("secret")
        _require(secret is None or isinstance(secret, str),
                 "counts file field 'secret' must be a string")
        label = obj.get("label")
        _require(label is None or isinstance(label, str),
                 "counts file field 'label' must be a string")
        return cls(obj["counts"], obj["shots"], n_qubits=obj["n_qubits"],
                   secret=secret, label=label)

    def save(self, path) -> None:
        _jsontext.dump(path, self.to_json_dict())

    @classmethod
    def load(cls, path) -> "CountsMap":
        return cls.from_json_dict(_load_json(path, "counts"))


class ProbDistribution:
    """Sparse distribution over observed outcomes.

    Every stored probability is strictly positive and the total is 1 within
    PROB_SUM_TOLERANCE. ``raw_total`` is a diagnostic: the probability mass
    present before any renormalization (< 1 when shots were discarded).
    """

    __slots__ = ("probs", "n_qubits", "raw_total")

    def __init__(self, probs: Mapping[str, float], n_qubits: int | None = None,
                 raw_total: float | None = None):
        _require(bool(probs), "distribution must have at least one outcome")
        length = _validated_length(probs.keys(), n_qubits)
        clean: dict[str, float] = {}
        for key, value in probs.items():
            value = float(value)
            _require(math.isfinite(value) and value > 0.0,
                     f"probability for {str(key)!r} must be finite and > 0")
            clean[str(key)] = value
        total = math.fsum(clean.values())
        _require(abs(total - 1.0) <= PROB_SUM_TOLERANCE,
                 f"probabilities sum to {total!r}, not 1")
        self.probs = clean
        self.n_qubits = length
        self.raw_total = raw_total

    @classmethod
    def from_weights(cls, weights: Mapping[str, float],
                     n_qubits: int | None = None,
                     raw_total: float | None = None) -> "ProbDistribution":
        """Normalize nonnegative weights to a distribution, dropping zeros."""
        _require(bool(weights), "weights must be non-empty")
        for key, value in weights.items():
            _require(math.isfinite(float(value)) and float(value) >= 0.0,
                     f"weight for {str(key)!r} must be finite and >= 0")
        total = math.fsum(float(v) for v in weights.values())
        _require(total > 0.0, "weights must not all be zero")
        probs = {k: float(v) / total for k, v in weights.items() if float(v) > 0.0}
        return cls(probs, n_qubits=n_qubits, raw_total=raw_total)

    @property
    def support(self) -> tuple[str, ...]:
        """Observed outcomes in ascending lexicographic order."""
        return tuple(sorted(self.probs))

    def get(self, key: str, default: float = 0.0) -> float:
        return self.probs.get(key, default)

    def items(self):
        return self.probs.items()

    def __len__(self) -> int:
        return len(self.probs)

    def __iter__(self):
        return iter(self.probs)

    def __contains__(self, key) -> bool:
        return key in self.probs

    def __eq__(self, other) -> bool:
        if not isinstance(other, ProbDistribution):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self.probs == other.probs

    def __repr__(self) -> str:
        return (f"ProbDistribution(n_qubits={self.n_qubits}, "
                f"outcomes={len(self.probs)})")

    def to_json_dict(self) -> dict:
        out: dict = {
            "n_qubits": self.n_qubits,
            "probs": {k: self.probs[k] for k in sorted(self.probs)},
        }
        if self.raw_total is not None:
            out["raw_total"] = self.raw_total
        return out

    @classmethod
    def from_json_dict(cls, obj) -> "ProbDistribution":
        _require(isinstance(obj, dict), "distribution file must be a JSON object")
        for field in ("n_qubits", "probs"):
            _require(field in obj, f"distribution file is missing field '{field}'")
        _require(isinstance(obj["probs"], dict),
                 "distribution file field 'probs' must be an object")
        raw_total = obj.get("raw_total")
        _require(raw_total is None or isinstance(raw_total, (int, float)),
                 "distribution file field 'raw_total' must be a number")
        probs = {k: float(v) for k, v in obj["probs"].items()}
        return cls(probs, n_qubits=obj["n_qubits"],
                   raw_total=None if raw_total is None else float(raw_total))

    def save(self, path) -> None:
        _jsontext.dump(path, self.to_json_dict())

    @classmethod
    def load(cls, path) -> "ProbDistribution":
        return cls.from_json_dict(_load_json(path, "distribution"))


def _load_json(path, kind: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError:
        raise
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"{kind} file {path} is not valid JSON: {exc}") from exc


def from_counts(counts: CountsMap) -> ProbDistribution:
    """Counts divided by shots; renormalized if some shots were discarded.

    The pre-normalization mass (total counts / shots) is recorded on the
    result as ``raw_total``.
    """
    total = counts.total_counts
    raw_total = total / counts.shots
    divisor = counts.shots if total == counts.shots else total
    probs = {k: v / divisor for k, v in counts.counts.items()}
    return ProbDistribution(probs, n_qubits=counts.n_qubits, raw_total=raw_total)


class StateGraph:
    """Observed outcomes as nodes; edges join pairs at Hamming distance one.

    Edges are stored as lexicographically ordered pairs (a, b) with a < b.
    """

    __slots__ = ("nodes", "edges", "n_qubits")

    def __init__(self, nodes: Mapping[str, float],
                 edges: frozenset[tuple[str, str]], n_qubits: int):
        self.nodes = dict(nodes)
        self.edges = frozenset(edges)
        self.n_qubits = n_qubits

    def degree(self, key: str) -> int:
        return sum(1 for a, b in self.edges if key in (a, b))


def build_state_graph(dist: ProbDistribution) -> StateGraph:
    """Connect observed outcomes that differ in exactly one bit."""
    keys = set(dist.probs)
    edges: set[tuple[str, str]] = set()
    for key in keys:
        for pos in range(dist.n_qubits):
            flipped = key[:pos] + ("1" if key[pos] == "0" else "0") + key[pos + 1:]
            if flipped in keys:
                edges.add((key, flipped) if key < flipped else (flipped, key))
    return StateGraph(dist.probs, frozenset(edges), dist.n_qubits)


def rank_of(dist: ProbDistribution, target: str) -> int:
    """Competition rank of ``target``: 1 + number of strictly higher outcomes.

    An unobserved target ranks below every observed one (ties with other
    unobserved strings share that rank).
    """
    target = BitString(target)
    if len(target) != dist.n_qubits:
        raise InvalidInputError(
            f"target has {len(target)} bits, expected {dist.n_qubits}"
        )
    p = dist.probs.get(target, 0.0)
    return 1 + sum(1 for v in dist.probs.values() if v > p)
