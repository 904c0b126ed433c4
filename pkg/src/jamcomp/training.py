"""Counting estimators for the chord HMM and its JSON model file.

Emissions average the pitch-class histograms of all bars labelled with a
chord, transitions count chord bigrams within each song (never across
song boundaries), and priors count song-opening chords.  Every estimate
is additively smoothed and row-normalised, so each row is a proper
distribution; rows with no evidence at all fall back to uniform.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import IO, Iterable, List, Sequence, Tuple, Union

import numpy as np

from jamcomp.errors import JamcompError
from jamcomp.music import Chord, ChordVocabulary, PitchHistogram

DEFAULT_EPSILON = 1e-6

#: Keys of the model file, in serialisation order.
_MODEL_KEYS = ("vocabulary_mode", "epsilon", "pi", "A", "mu")


class ModelFormatError(JamcompError):
    """A model file that cannot be loaded as a valid model."""


@dataclass(frozen=True)
class TrainingSequence:
    """One song prepared for training: a chord per bar plus the bar's
    pitch-class histogram."""

    chords: Tuple[Chord, ...]
    histograms: Tuple[PitchHistogram, ...]

    def __post_init__(self):
        object.__setattr__(self, "chords", tuple(self.chords))
        object.__setattr__(self, "histograms", tuple(self.histograms))
        if len(self.chords) != len(self.histograms):
            raise ValueError(
                f"{len(self.chords)} chords vs {len(self.histograms)} histograms"
            )
        if len(self.chords) < 2:
            raise ValueError("a training sequence needs at least two bars")

    def __len__(self) -> int:
        return len(self.chords)


class HmmModel:
    """Chord HMM parameters over a fixed vocabulary.

    pi[k] is the start probability of chord k, a[i, k] the probability of
    moving from chord i to chord k, and mu[k] the expected pitch-class
    profile under chord k.  All rows are distributions; after smoothing
    with epsilon > 0 every entry is strictly positive.
    """

    def __init__(self, vocabulary: ChordVocabulary, pi, a, mu, epsilon: float):
        self.vocabulary = vocabulary
        self.pi = np.asarray(pi, dtype=np.float64)
        self.a = np.asarray(a, dtype=np.float64)
        self.mu = np.asarray(mu, dtype=np.float64)
        self.epsilon = float(epsilon)
        n = len(vocabulary)
        if self.pi.shape != (n,):
            raise ValueError(f"pi shape {self.pi.shape}, expected ({n},)")
        if self.a.shape != (n, n):
            raise ValueError(f"A shape {self.a.shape}, expected ({n}, {n})")
        if self.mu.shape != (n, 12):
            raise ValueError(f"mu shape {self.mu.shape}, expected ({n}, 12)")

    @property
    def size(self) -> int:
        return len(self.vocabulary)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, HmmModel)
            and self.vocabulary == other.vocabulary
            and self.epsilon == other.epsilon
            and np.array_equal(self.pi, other.pi)
            and np.array_equal(self.a, other.a)
            and np.array_equal(self.mu, other.mu)
        )

    def __repr__(self) -> str:
        return f"HmmModel({self.vocabulary.mode}, N={self.size}, epsilon={self.epsilon})"


def _chord_indices(song: TrainingSequence, vocabulary: ChordVocabulary) -> List[int]:
    try:
        return [vocabulary.index_of(c) for c in song.chords]
    except KeyError as exc:
        raise ValueError(f"song uses a chord outside the vocabulary: {exc}") from None


def _normalise_rows(counts: np.ndarray, epsilon: float) -> np.ndarray:
    smoothed = counts + epsilon
    totals = smoothed.sum(axis=1, keepdims=True)
    rows = np.where(totals > 0, smoothed / np.where(totals == 0, 1.0, totals), 0.0)
    # A row with no evidence and no smoothing carries no information.
    empty = totals[:, 0] == 0
    rows[empty] = 1.0 / counts.shape[1]
    return rows


def learn_emissions(corpus: Iterable[TrainingSequence], vocabulary: ChordVocabulary,
                    epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Per-chord pitch-class profile: the normalised sum of histogram mass
    of every bar carrying the chord.  Silent bars add nothing."""
    counts = np.zeros((len(vocabulary), 12), dtype=np.float64)
    for song in corpus:
        indices = _chord_indices(song, vocabulary)
        for k, hist in zip(indices, song.histograms):
            counts[k] += np.asarray(hist.mass)
    return _normalise_rows(counts, epsilon)


def learn_transitions(corpus: Iterable[TrainingSequence], vocabulary: ChordVocabulary,
                      epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Row-normalised chord bigram matrix.  Bigrams never span songs."""
    n = len(vocabulary)
    counts = np.zeros((n, n), dtype=np.float64)
    for song in corpus:
        indices = _chord_indices(song, vocabulary)
        for i, k in zip(indices, indices[1:]):
            counts[i, k] += 1.0
    return _normalise_rows(counts, epsilon)


def learn_priors(corpus: Iterable[TrainingSequence], vocabulary: ChordVocabulary,
                 epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Start distribution from song-opening chord counts:
    (count + epsilon) / (songs + N * epsilon)."""
    n = len(vocabulary)
    counts = np.zeros(n, dtype=np.float64)
    songs = 0
    for song in corpus:
        counts[_chord_indices(song, vocabulary)[0]] += 1.0
        songs += 1
    if songs == 0:
        raise ValueError("cannot learn priors from an empty corpus")
    return (counts + epsilon) / (songs + n * epsilon)


def train_model(corpus: Sequence[TrainingSequence], vocabulary: ChordVocabulary,
                epsilon: float = DEFAULT_EPSILON) -> HmmModel:
    corpus = list(corpus)
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    return HmmModel(
        vocabulary,
        pi=learn_priors(corpus, vocabulary, epsilon),
        a=learn_transitions(corpus, vocabulary, epsilon),
        mu=learn_emissions(corpus, vocabulary, epsilon),
        epsilon=epsilon,
    )


def save_model(model: HmmModel, path: Union[str, "IO[str]"]) -> None:
    """Write the model as JSON with a fixed key order and full-precision
    decimal floats, so save -> load -> save is byte-identical."""
    payload = {
        "vocabulary_mode": model.vocabulary.mode,
        "epsilon": model.epsilon,
        "pi": model.pi.tolist(),
        "A": model.a.tolist(),
        "mu": model.mu.tolist(),
    }
    text = json.dumps(payload, indent=1)
    if hasattr(path, "write"):
        path.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _check_rows(name: str, rows: np.ndarray) -> None:
    if not np.isfinite(rows).all():
        raise ModelFormatError(f"{name} contains non-finite entries")
    if (rows < 0).any():
        raise ModelFormatError(f"{name} contains negative entries")
    sums = rows.sum(axis=-1)
    bad = np.abs(sums - 1.0) > 1e-6
    if np.any(bad):
        where = int(np.argmax(np.atleast_1d(bad)))
        raise ModelFormatError(
            f"{name} row {where} sums to {np.atleast_1d(sums)[where]!r}, "
            "expected 1 within 1e-6"
        )


def load_model(path: Union[str, "IO[str]"]) -> HmmModel:
    """Load and validate a model file; any structural defect raises
    ModelFormatError naming the problem."""
    try:
        if hasattr(path, "read"):
            payload = json.load(path)
        else:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"model file is not valid JSON: {exc}") from exc

    if not isinstance(payload, dict):
        raise ModelFormatError("model file must hold a JSON object")
    missing = [key for key in _MODEL_KEYS if key not in payload]
    if missing:
        raise ModelFormatError(f"model file misses keys: {', '.join(missing)}")

    try:
        vocabulary = ChordVocabulary.from_mode(payload["vocabulary_mode"])
    except (ValueError, TypeError) as exc:
        raise ModelFormatError(str(exc)) from exc

    n = len(vocabulary)
    try:
        pi = np.asarray(payload["pi"], dtype=np.float64)
        a = np.asarray(payload["A"], dtype=np.float64)
        mu = np.asarray(payload["mu"], dtype=np.float64)
        epsilon = float(payload["epsilon"])
    except (TypeError, ValueError) as exc:
        raise ModelFormatError(f"model arrays are malformed: {exc}") from exc

    if pi.shape != (n,):
        raise ModelFormatError(f"pi has shape {pi.shape}, expected ({n},)")
    if a.shape != (n, n):
        raise ModelFormatError(f"A has shape {a.shape}, expected ({n}, {n})")
    if mu.shape != (n, 12):
        raise ModelFormatError(f"mu has shape {mu.shape}, expected ({n}, 12)")
    _check_rows("pi", pi[None, :])
    _check_rows("A", a)
    _check_rows("mu", mu)
    return HmmModel(vocabulary, pi=pi, a=a, mu=mu, epsilon=epsilon)


def chord_frequencies(corpus: Iterable[TrainingSequence],
                      vocabulary: ChordVocabulary) -> np.ndarray:
    """Bar counts per chord, for the training stats report."""
    counts = np.zeros(len(vocabulary), dtype=np.int64)
    for song in corpus:
        for k in _chord_indices(song, vocabulary):
            counts[k] += 1
    return counts


def training_stats(corpus: Sequence[TrainingSequence], model: HmmModel) -> dict:
    """Machine-readable summary emitted next to a trained model: chord
    frequency table plus the transition matrix with its labels."""
    counts = chord_frequencies(corpus, model.vocabulary)
    labels = [c.name for c in model.vocabulary]
    return {
        "songs": len(corpus),
        "bars": int(sum(len(s) for s in corpus)),
        "chord_frequencies": {
            label: int(count) for label, count in zip(labels, counts)
        },
        "transition_labels": labels,
        "transition_matrix": model.a.tolist(),
    }
