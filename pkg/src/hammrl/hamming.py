"""Bitstring outcomes and Hamming-space primitives.

Measurement outcomes are ASCII '0'/'1' strings; the leftmost character is
qubit 0. Distances are popcounts of XOR on the packed integer form. Hot
paths pack whole supports into uint64 word arrays (see ``pack_bitstrings``)
and hand them to the kernel backends.
"""

from __future__ import annotations

import itertools
from typing import Iterable

import numpy as np

from .errors import CapacityError, InvalidInputError

# Ceiling for anything that enumerates all 2^n strings (dense oracles,
# analytic noise channels). Above this, only sparse paths are supported.
DENSE_ENUMERATION_LIMIT = 20

_WORD_BITS = 64
_WORD_MASK = (1 << _WORD_BITS) - 1


class BitString(str):
    """A fixed-length binary outcome string.

    Subclasses ``str`` so instances serve directly as dict keys and JSON
    object keys. Construction validates the alphabet; the empty string is
    rejected.
    """

    __slots__ = ()

    def __new__(cls, text) -> "BitString":
        if type(text) is cls:
            return text
        s = super().__new__(cls, text)
        if not s:
            raise InvalidInputError("bitstring must be non-empty")
        if s.strip("01"):
            raise InvalidInputError(
                f"bitstring may contain only '0' and '1', got {str(s)!r}"
            )
        return s

    @classmethod
    def from_value(cls, value: int, n_qubits: int) -> "BitString":
        """Rebuild the string form from a packed integer."""
        if n_qubits <= 0:
            raise InvalidInputError("n_qubits must be positive")
        if value < 0 or value >> n_qubits:
            raise InvalidInputError(
                f"value {value} does not fit in {n_qubits} bits"
            )
        return cls(format(value, f"0{n_qubits}b"))

    @property
    def n_qubits(self) -> int:
        return len(self)

    @property
    def value(self) -> int:
        """Packed integer; the leftmost character is the most significant bit."""
        return int(self, 2)

    @property
    def ones_count(self) -> int:
        return self.count("1")


def hamming_distance(x: str, y: str) -> int:
    """Number of positions at which two equal-length bitstrings differ."""
    bx = BitString(x)
    by = BitString(y)
    if len(bx) != len(by):
        raise InvalidInputError(
            f"length mismatch: {len(bx)} vs {len(by)} bits"
        )
    return (bx.value ^ by.value).bit_count()


def neighbors_at_distance(x: str, distance: int) -> set[BitString]:
    """All strings at exactly ``distance`` bit flips from ``x``.

    The result has C(n, distance) elements, so large n with mid-range
    distances is combinatorially expensive by nature.
    """
    bx = BitString(x)
    n = len(bx)
    if distance < 0 or distance > n:
        raise InvalidInputError(f"distance {distance} outside 0..{n}")
    flip = {"0": "1", "1": "0"}
    out: set[BitString] = set()
    for positions in itertools.combinations(range(n), distance):
        chars = list(bx)
        for p in positions:
            chars[p] = flip[chars[p]]
        out.add(BitString("".join(chars)))
    return out


def enumerate_space(n_qubits: int) -> list[BitString]:
    """All 2^n strings of length ``n_qubits`` in ascending lexicographic order."""
    if n_qubits <= 0:
        raise InvalidInputError("n_qubits must be positive")
    if n_qubits > DENSE_ENUMERATION_LIMIT:
        raise CapacityError(
            f"n_qubits={n_qubits} exceeds the dense enumeration limit "
            f"of {DENSE_ENUMERATION_LIMIT}"
        )
    width = f"0{n_qubits}b"
    return [BitString(format(v, width)) for v in range(1 << n_qubits)]


def words_per_string(n_qubits: int) -> int:
    """uint64 words needed to hold one n-qubit string."""
    return max(1, -(-n_qubits // _WORD_BITS))


def pack_bitstrings(keys: Iterable[str], n_qubits: int) -> np.ndarray:
    """Pack bitstrings into a (len(keys), words) uint64 array for the kernels.

    Word 0 holds the least significant 64 bits of the packed value. Keys are
    assumed already validated; callers pass distribution supports.
    """
    keys = list(keys)
    n_words = words_per_string(n_qubits)
    out = np.zeros((len(keys), n_words), dtype=np.uint64)
    for row, key in enumerate(keys):
        value = int(key, 2)
        for w in range(n_words):
            out[row, w] = (value >> (w * _WORD_BITS)) & _WORD_MASK
    return out
