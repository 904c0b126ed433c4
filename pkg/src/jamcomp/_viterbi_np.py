"""Vectorised fallback for the trellis kernel.

Used when the compiled extension is unavailable.  Must stay bit-identical
to jamcomp._viterbi_cy.decode: numpy argmax keeps the first maximum, which
matches the compiled kernel's lowest-index tie rule.
"""

import numpy as np


def decode(weighted_emissions, weighted_log_a, weighted_log_pi):
    """See jamcomp._viterbi_cy.decode for the contract."""
    T, N = weighted_emissions.shape
    if T == 0 or N == 0:
        raise ValueError("empty trellis")

    value = np.empty((T, N), dtype=np.float64)
    parents = np.full((T, N), -1, dtype=np.int64)

    value[0] = weighted_emissions[0] + weighted_log_pi
    for t in range(1, T):
        scores = weighted_log_a + value[t - 1][:, None]
        parents[t] = np.argmax(scores, axis=0)
        value[t] = weighted_emissions[t] + scores[parents[t], np.arange(N)]

    path = np.empty(T, dtype=np.int64)
    path[T - 1] = int(np.argmax(value[T - 1]))
    for t in range(T - 1, 0, -1):
        path[t - 1] = parents[t, path[t]]

    return path, float(value[T - 1, path[T - 1]]), parents
