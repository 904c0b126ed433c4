"""Log-space chord decoding over bar histograms.

The decoder maximises a biased objective over chord paths

    (1 - alpha) * log P(observations | path) + alpha * log P(path)

where alpha in [0, 1] trades the emission term against the structural
(prior + transition) term; alpha = 0.5 ranks paths exactly like the
unweighted joint likelihood.  Emission log-probability of one bar is the
dot product of its histogram with the chord's log profile, and a silent
bar scores zero for every chord so only structure speaks.

Ties resolve to the lowest vocabulary index at every maximisation, which
for both vocabularies is the lowest chord id.  The exhaustive scorer
brute_force_map shares that rule (lexicographically smallest optimal
path) and exists purely as an independent check on the trellis kernels.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from jamcomp.errors import JamcompError
from jamcomp.music import Chord, PitchHistogram
from jamcomp.training import HmmModel
from jamcomp import _viterbi_np

try:
    from jamcomp import _viterbi_cy
except ImportError:  # extension not built; numpy fallback still works
    _viterbi_cy = None

#: Environment switch forcing the numpy kernel even when the compiled
#: extension is importable.
PURE_PYTHON_ENV = "JAMCOMP_PURE_PYTHON"

_SEARCH_SPACE_LIMIT = 10 ** 7
_CHUNK = 1 << 15


class SearchSpaceError(JamcompError):
    """Exhaustive enumeration refused: the path space is too large."""


@dataclass(frozen=True)
class ViterbiResult:
    """Decoded path with its objective value and the backpointer table.

    trellis_parents[t, k] is the best predecessor of chord k at bar t
    (row 0 is a -1 sentinel), kept for inspection and tests.
    """

    path: List[Chord]
    log_score: float
    trellis_parents: np.ndarray


def available_kernels() -> dict:
    """Name -> decode callable for every usable trellis backend."""
    kernels = {"numpy": _viterbi_np.decode}
    if _viterbi_cy is not None:
        kernels["compiled"] = _viterbi_cy.decode
    return kernels


def active_kernel_name() -> str:
    if os.environ.get(PURE_PYTHON_ENV):
        return "numpy"
    return "compiled" if _viterbi_cy is not None else "numpy"


def _resolve_kernel(name: Optional[str]):
    kernels = available_kernels()
    if name is None:
        name = active_kernel_name()
    try:
        return kernels[name]
    except KeyError:
        raise JamcompError(
            f"trellis kernel {name!r} unavailable; built: {sorted(kernels)}"
        ) from None


def _log(values: np.ndarray) -> np.ndarray:
    out = np.full_like(values, -np.inf)
    np.log(values, where=values > 0, out=out)
    return out


def emission_matrix(history: Sequence[PitchHistogram], model: HmmModel) -> np.ndarray:
    """T x N matrix of emission log-probabilities h . log mu."""
    masses = np.asarray([h.mass for h in history], dtype=np.float64)
    log_mu = _log(model.mu)
    if np.isfinite(log_mu).all():
        return masses @ log_mu.T
    # Zero profile entries: apply the 0 * log 0 := 0 convention cell-wise.
    with np.errstate(invalid="ignore"):
        contributions = masses[:, None, :] * log_mu[None, :, :]
    contributions = np.where(masses[:, None, :] == 0.0, 0.0, contributions)
    return contributions.sum(axis=2)


def emission_logprob(histogram: PitchHistogram, model: HmmModel, chord_index: int) -> float:
    """Emission score of one bar under one chord; 0 for a silent bar."""
    if not 0 <= chord_index < model.size:
        raise ValueError(f"chord index out of range: {chord_index}")
    return float(emission_matrix([histogram], model)[0, chord_index])


def _weighted_terms(history, model: HmmModel, alpha: float):
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if len(history) == 0:
        raise ValueError("history is empty")
    n = model.size
    # A zero weight must erase its term even against log 0 = -inf.
    if alpha == 1.0:
        w_emission = np.zeros((len(history), n))
    else:
        w_emission = (1.0 - alpha) * emission_matrix(history, model)
    if alpha == 0.0:
        w_transition = np.zeros((n, n))
        w_start = np.zeros(n)
    else:
        w_transition = alpha * _log(model.a)
        w_start = alpha * _log(model.pi)
    return (
        np.ascontiguousarray(w_emission),
        np.ascontiguousarray(w_transition),
        np.ascontiguousarray(w_start),
    )


def viterbi(history: Sequence[PitchHistogram], model: HmmModel,
            alpha: float = 0.5, kernel: Optional[str] = None) -> ViterbiResult:
    """Best chord path for a bar-histogram history under the biased
    objective.  kernel picks a trellis backend by name; default is the
    compiled one when built, unless JAMCOMP_PURE_PYTHON is set."""
    decode = _resolve_kernel(kernel)
    w_emission, w_transition, w_start = _weighted_terms(history, model, alpha)
    path_idx, score, parents = decode(w_emission, w_transition, w_start)
    chords = [model.vocabulary.chords[int(k)] for k in path_idx]
    return ViterbiResult(path=chords, log_score=score, trellis_parents=parents)


def brute_force_map(history: Sequence[PitchHistogram], model: HmmModel,
                    alpha: float = 0.5) -> List[Chord]:
    """Exhaustive argmax over all N^T paths, ties to the lexicographically
    smallest index sequence.  Refuses when N^T exceeds 10^7."""
    w_emission, w_transition, w_start = _weighted_terms(history, model, alpha)
    t_len, n = w_emission.shape
    if n ** t_len > _SEARCH_SPACE_LIMIT:
        raise SearchSpaceError(
            f"{n}^{t_len} paths exceed the enumeration limit of {_SEARCH_SPACE_LIMIT}"
        )

    best_score = -np.inf
    best_path = None
    iterator = itertools.product(range(n), repeat=t_len)
    while True:
        chunk = list(itertools.islice(iterator, _CHUNK))
        if not chunk:
            break
        paths = np.asarray(chunk, dtype=np.int64)
        scores = w_start[paths[:, 0]].copy()
        for t in range(t_len):
            scores += w_emission[t, paths[:, t]]
        for t in range(1, t_len):
            scores += w_transition[paths[:, t - 1], paths[:, t]]
        i = int(np.argmax(scores))
        # Strict improvement keeps the earliest (smallest) optimal path,
        # including the all -inf degenerate case.
        if best_path is None or scores[i] > best_score:
            best_score = float(scores[i])
            best_path = chunk[i]
    return [model.vocabulary.chords[k] for k in best_path]
