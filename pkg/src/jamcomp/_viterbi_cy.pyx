# cython: language_level=3
"""Compiled trellis kernel for the log-space decoder.

Operates on pre-weighted matrices so the bias handling (and its 0 * -inf
convention) lives in one place, jamcomp.viterbi.  Semantics must stay
bit-identical to jamcomp._viterbi_np.decode: ties at every maximisation
resolve to the lowest index.
"""

import numpy as np

from libc.math cimport INFINITY


def decode(double[:, ::1] weighted_emissions,
           double[:, ::1] weighted_log_a,
           double[::1] weighted_log_pi):
    """Fill the value trellis and backtrace the best path.

    weighted_emissions: T x N matrix of (1 - alpha) * emission log-probs.
    weighted_log_a:     N x N matrix of alpha * log transition probs.
    weighted_log_pi:    N vector of alpha * log start probs.
    Returns (path int64[T], best final value, parents int64[T x N]).
    """
    cdef Py_ssize_t T = weighted_emissions.shape[0]
    cdef Py_ssize_t N = weighted_emissions.shape[1]
    if T == 0 or N == 0:
        raise ValueError("empty trellis")

    value_arr = np.empty((T, N), dtype=np.float64)
    parents_arr = np.full((T, N), -1, dtype=np.int64)
    path_arr = np.empty(T, dtype=np.int64)
    cdef double[:, ::1] value = value_arr
    cdef long long[:, ::1] parents = parents_arr
    cdef long long[::1] path = path_arr

    cdef Py_ssize_t t, k, i, best_i, best_k
    cdef double best, cand

    for k in range(N):
        value[0, k] = weighted_emissions[0, k] + weighted_log_pi[k]

    for t in range(1, T):
        for k in range(N):
            best = weighted_log_a[0, k] + value[t - 1, 0]
            best_i = 0
            for i in range(1, N):
                cand = weighted_log_a[i, k] + value[t - 1, i]
                if cand > best:
                    best = cand
                    best_i = i
            value[t, k] = weighted_emissions[t, k] + best
            parents[t, k] = best_i

    best_k = 0
    best = value[T - 1, 0]
    for k in range(1, N):
        if value[T - 1, k] > best:
            best = value[T - 1, k]
            best_k = k

    path[T - 1] = best_k
    for t in range(T - 1, 0, -1):
        path[t - 1] = parents[t, path[t]]

    return path_arr, float(value[T - 1, best_k]), parents_arr
