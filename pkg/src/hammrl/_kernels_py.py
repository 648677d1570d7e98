"""Pure NumPy implementations of the pairwise Hamming kernels.

Fallback for when the compiled extension is unavailable. These materialize
M x M intermediates (distances, weights), trading memory for vectorization;
the compiled kernels stream over pairs instead. Reductions use bincount and
einsum, which accumulate in fixed index order, keeping results deterministic
across runs.
"""

from __future__ import annotations

import numpy as np

from .errors import CapacityError, InvalidInputError

BACKEND_NAME = "python"

# Estimated dense-intermediate bytes above which this backend refuses to run.
# The compiled backend has no such ceiling.
DENSE_BYTES_LIMIT = 2 << 30


def _check_dense_budget(n_rows: int) -> None:
    approx = n_rows * n_rows * 10  # float64 weights + int16 distances
    if approx > DENSE_BYTES_LIMIT:
        raise CapacityError(
            f"support of {n_rows} strings needs roughly {approx >> 20} MiB of "
            "dense matrices in the python backend; build the compiled kernels "
            "for supports this large"
        )


def distance_matrix(packed: np.ndarray) -> np.ndarray:
    """All-pairs Hamming distances as an (M, M) int16 array."""
    _check_dense_budget(packed.shape[0])
    xor = packed[:, None, :] ^ packed[None, :, :]
    return np.bitwise_count(xor).sum(axis=2, dtype=np.int16)


def make_pairwise_operator(packed: np.ndarray, table: np.ndarray):
    """Build apply(values) computing out_i = sum_j table[h(i,j)] * values_j."""
    table = np.asarray(table, dtype=np.float64)
    dmat = distance_matrix(packed)
    if dmat.size and int(dmat.max()) >= table.shape[0]:
        raise InvalidInputError(
            "weight table shorter than the largest pair distance"
        )
    wmat = table[dmat]

    def apply(values: np.ndarray) -> np.ndarray:
        # einsum keeps the j-sum sequential (no BLAS threading), matching
        # the compiled kernel's accumulation order.
        return np.einsum("ij,j->i", wmat, np.asarray(values, dtype=np.float64))

    return apply


def _bucket_accumulate(dmat, weights, n_buckets):
    m = dmat.shape[0]
    if dmat.size and int(dmat.max()) >= n_buckets:
        raise InvalidInputError(
            "bucket count smaller than the largest pair distance"
        )
    flat = (dmat + np.arange(m, dtype=np.int64)[:, None] * n_buckets).ravel()
    sums = np.bincount(flat, weights=weights.ravel(), minlength=m * n_buckets)
    return sums.reshape(m, n_buckets)


def bucket_sums(packed: np.ndarray, values: np.ndarray, n_buckets: int) -> np.ndarray:
    """out[i, t] = sum of values[j] over j with h(i, j) == t."""
    values = np.asarray(values, dtype=np.float64)
    m = packed.shape[0]
    dmat = distance_matrix(packed).astype(np.int64)
    weights = np.broadcast_to(values, (m, m))
    return _bucket_accumulate(dmat, weights, n_buckets)


def bucket_sums_filtered(
    packed: np.ndarray, values: np.ndarray, ref: np.ndarray, n_buckets: int
) -> np.ndarray:
    """Like bucket_sums, but only j with ref[j] < ref[i] contribute to row i."""
    values = np.asarray(values, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    m = packed.shape[0]
    dmat = distance_matrix(packed).astype(np.int64)
    weights = np.where(ref[None, :] < ref[:, None], values[None, :], 0.0)
    return _bucket_accumulate(dmat, weights, n_buckets)
