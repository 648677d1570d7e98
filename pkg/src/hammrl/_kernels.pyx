# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: initializedcheck=False
# cython: cdivision=True
"""Compiled pairwise Hamming kernels.

Popcount-of-XOR inner loops over packed uint64 supports. Operators cache
pair distances as an int16 matrix (a quarter of the fallback's float64
weight matrix) while the support fits PAIR_BYTES_LIMIT, and recompute
popcounts on the fly above it so memory stays O(M * W). Every loop has a
fixed accumulation order, so each backend is individually deterministic;
across backends results agree only to rounding.
"""

import numpy as np

from libc.stdint cimport int16_t, uint64_t

from .errors import InvalidInputError

BACKEND_NAME = "compiled"

# int16 distance-cache budget for operators; larger supports stream
PAIR_BYTES_LIMIT = 1 << 30

cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #  define HRL_POPCOUNT64(x) __builtin_popcountll(x)
    #else
    static int HRL_POPCOUNT64(unsigned long long v) {
        v = v - ((v >> 1) & 0x5555555555555555ULL);
        v = (v & 0x3333333333333333ULL) + ((v >> 2) & 0x3333333333333333ULL);
        v = (v + (v >> 4)) & 0x0F0F0F0F0F0F0F0FULL;
        return (int)((v * 0x0101010101010101ULL) >> 56);
    }
    #endif
    """
    int HRL_POPCOUNT64(uint64_t x) nogil


cdef inline int _pair_distance(
    const uint64_t[:, ::1] packed, Py_ssize_t i, Py_ssize_t j
) nogil:
    cdef Py_ssize_t w
    cdef int dist = 0
    for w in range(packed.shape[1]):
        dist += HRL_POPCOUNT64(packed[i, w] ^ packed[j, w])
    return dist


def distance_matrix(const uint64_t[:, ::1] packed):
    """All-pairs Hamming distances as an (M, M) int16 array."""
    cdef Py_ssize_t m = packed.shape[0]
    out_arr = np.empty((m, m), dtype=np.int16)
    cdef int16_t[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    with nogil:
        # full fill: redundant popcounts but linear stores
        for i in range(m):
            for j in range(m):
                out[i, j] = <int16_t> _pair_distance(packed, i, j)
    return out_arr


def pairwise_apply(
    const uint64_t[:, ::1] packed,
    const double[::1] table,
    const double[::1] values,
):
    """out_i = sum_j table[h(i, j)] * values_j, distances recomputed."""
    cdef Py_ssize_t m = packed.shape[0]
    cdef Py_ssize_t n_weights = table.shape[0]
    if values.shape[0] != m:
        raise InvalidInputError("values length does not match packed rows")
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef int dist
    cdef int overflow = 0
    cdef double acc
    with nogil:
        for i in range(m):
            acc = 0.0
            for j in range(m):
                dist = _pair_distance(packed, i, j)
                if dist >= n_weights:
                    overflow = 1
                    break
                acc += table[dist] * values[j]
            if overflow:
                break
            out[i] = acc
    if overflow:
        raise InvalidInputError(
            "weight table shorter than the largest pair distance"
        )
    return out_arr


def _cached_apply(
    const int16_t[:, ::1] dmat,
    const double[::1] table,
    const double[::1] values,
):
    """out_i = sum_j table[dmat[i, j]] * values_j over a cached matrix.

    Four interleaved accumulators per row; the order is fixed, so repeat
    calls are bit-identical even though the grouping differs from a
    straight left-to-right sum.
    """
    cdef Py_ssize_t m = dmat.shape[0]
    if values.shape[0] != m:
        raise InvalidInputError("values length does not match packed rows")
    out_arr = np.empty(m, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef double a0, a1, a2, a3
    with nogil:
        for i in range(m):
            a0 = a1 = a2 = a3 = 0.0
            j = 0
            while j + 4 <= m:
                a0 += table[dmat[i, j]] * values[j]
                a1 += table[dmat[i, j + 1]] * values[j + 1]
                a2 += table[dmat[i, j + 2]] * values[j + 2]
                a3 += table[dmat[i, j + 3]] * values[j + 3]
                j += 4
            while j < m:
                a0 += table[dmat[i, j]] * values[j]
                j += 1
            out[i] = (a0 + a1) + (a2 + a3)
    return out_arr


def make_pairwise_operator(packed, table):
    """Build apply(values) with apply_i = sum_j table[h(i, j)] * values_j.

    Caches the int16 distance matrix when it fits the byte budget, so
    iterated applies skip the popcount work; beyond the budget every call
    streams distances again.
    """
    packed_arr = np.ascontiguousarray(packed, dtype=np.uint64)
    table_arr = np.ascontiguousarray(table, dtype=np.float64)
    cdef Py_ssize_t m = packed_arr.shape[0]
    if m * m * 2 <= PAIR_BYTES_LIMIT:
        dmat = distance_matrix(packed_arr)
        if int(dmat.max(initial=0)) >= table_arr.shape[0]:
            raise InvalidInputError(
                "weight table shorter than the largest pair distance"
            )

        def apply(values):
            return _cached_apply(
                dmat, table_arr,
                np.ascontiguousarray(values, dtype=np.float64),
            )

        return apply

    def apply_streaming(values):
        return pairwise_apply(
            packed_arr, table_arr,
            np.ascontiguousarray(values, dtype=np.float64),
        )

    return apply_streaming


def bucket_sums(packed_obj, values_obj, n_buckets):
    """out[i, t] = sum of values[j] over j with h(i, j) == t."""
    cdef const uint64_t[:, ::1] packed = packed_obj
    cdef const double[::1] values = values_obj
    cdef Py_ssize_t m = packed.shape[0]
    cdef Py_ssize_t t = n_buckets
    if values.shape[0] != m:
        raise InvalidInputError("values length does not match packed rows")
    out_arr = np.zeros((m, t), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef int dist
    cdef int overflow = 0
    with nogil:
        for i in range(m):
            for j in range(m):
                dist = _pair_distance(packed, i, j)
                if dist >= t:
                    overflow = 1
                    break
                out[i, dist] += values[j]
            if overflow:
                break
    if overflow:
        raise InvalidInputError(
            "bucket count smaller than the largest pair distance"
        )
    return out_arr


def bucket_sums_filtered(packed_obj, values_obj, ref_obj, n_buckets):
    """Like bucket_sums, but only j with ref[j] < ref[i] contribute to row i."""
    cdef const uint64_t[:, ::1] packed = packed_obj
    cdef const double[::1] values = values_obj
    cdef const double[::1] ref = ref_obj
    cdef Py_ssize_t m = packed.shape[0]
    cdef Py_ssize_t t = n_buckets
    if values.shape[0] != m or ref.shape[0] != m:
        raise InvalidInputError("values/ref length does not match packed rows")
    out_arr = np.zeros((m, t), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j
    cdef int dist
    cdef int overflow = 0
    with nogil:
        for i in range(m):
            for j in range(m):
                if ref[j] < ref[i]:
                    dist = _pair_distance(packed, i, j)
                    if dist >= t:
                        overflow = 1
                        break
                    out[i, dist] += values[j]
            if overflow:
                break
    if overflow:
        raise InvalidInputError(
            "bucket count smaller than the largest pair distance"
        )
    return out_arr
