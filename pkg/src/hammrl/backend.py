"""Kernel backend selection: compiled extension with a NumPy fallback.

The compiled module is optional. Selection order at import time:

1. ``HAMMRL_BACKEND`` environment variable (``compiled`` or ``python``);
2. the compiled extension if it imported;
3. the NumPy fallback.

Tests and benchmarks switch at runtime with ``set_backend``/``use_backend``.
"""

from __future__ import annotations

import contextlib
import os
import warnings

import numpy as np

from . import _kernels_py
from .errors import InvalidInputError

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_IMPLS = {"python": _kernels_py}
if _compiled is not None:
    _IMPLS["compiled"] = _compiled


def _initial_backend() -> str:
    forced = os.environ.get("HAMMRL_BACKEND")
    if forced:
        if forced in _IMPLS:
            return forced
        warnings.warn(
            f"HAMMRL_BACKEND={forced!r} is not available; "
            f"falling back to default selection"
        )
    return "compiled" if "compiled" in _IMPLS else "python"


_active = _initial_backend()


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_IMPLS))


def active_backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _IMPLS:
        raise InvalidInputError(
            f"unknown or unavailable backend {name!r}; "
            f"available: {', '.join(available_backends())}"
        )
    _active = name


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily switch the active backend."""
    previous = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def _as_packed(packed) -> np.ndarray:
    return np.ascontiguousarray(packed, dtype=np.uint64)


def _as_f64(values) -> np.ndarray:
    return np.ascontiguousarray(values, dtype=np.float64)


def distance_matrix(packed) -> np.ndarray:
    """All-pairs Hamming distances for a packed support."""
    return _IMPLS[_active].distance_matrix(_as_packed(packed))


def pairwise_operator(packed, table):
    """apply(values) with apply_i = sum_j table[h(i,j)] * values_j."""
    return _IMPLS[_active].make_pairwise_operator(_as_packed(packed), _as_f64(table))


def bucket_sums(packed, values, n_buckets: int) -> np.ndarray:
    """Per-row sums of values bucketed by pair distance."""
    return _IMPLS[_active].bucket_sums(_as_packed(packed), _as_f64(values), int(n_buckets))


def bucket_sums_filtered(packed, values, ref, n_buckets: int) -> np.ndarray:
    """bucket_sums restricted to j with ref[j] < ref[i]."""
    return _IMPLS[_active].bucket_sums_filtered(
        _as_packed(packed), _as_f64(values), _as_f64(ref), int(n_buckets)
    )
