"""Evaluation harness: per-bar prediction accuracy under cross-validation.

Every live setting follows the same protocol: the prediction scored for
bar t is the one issued right after bar t-1 was observed, so bar 0 is
never scored and nothing ever peeks at the bar it predicts.  The offline
setting decodes the whole song at the end instead and is scored on every
bar.  Songs are split into near-equal folds; each fold is predicted by
models trained on the other folds only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from jamcomp.music import Chord, ChordVocabulary
from jamcomp.predictor import (
    BayesianBandSession,
    ChordPredictor,
    train_bayesian_band,
    transition_baseline,
)
from jamcomp.training import HmmModel, TrainingSequence, train_model
from jamcomp.viterbi import active_kernel_name, viterbi

#: Settings understood by cross_validate, in report order.
SETTINGS = (
    "hmm_inference",
    "hmm_vom_60",
    "hmm_vom_7",
    "transition_only",
    "bayesian_band",
)


@dataclass(frozen=True)
class SongResult:
    song_id: int
    accuracy: float


@dataclass(frozen=True)
class EvalReport:
    setting: str
    per_song: Tuple[SongResult, ...]
    mean_accuracy: float
    fold_means: Tuple[float, ...]
    runtime_seconds: float


@dataclass(frozen=True)
class HalfHalfResult:
    song_id: int
    first_half: float
    second_half: float


@dataclass(frozen=True)
class HalfHalfReport:
    per_song: Tuple[HalfHalfResult, ...]
    mean_first: float
    mean_second: float
    runtime_seconds: float

    def paired_samples(self) -> Tuple[List[float], List[float]]:
        """(second-half, first-half) accuracy lists, aligned by song."""
        return (
            [r.second_half for r in self.per_song],
            [r.first_half for r in self.per_song],
        )


def predict_song(engine, sequence: TrainingSequence) -> List[Optional[Chord]]:
    """Feed a song bar by bar; predictions[t] is the chord announced for
    bar t before it sounded (None for bar 0)."""
    predictions: List[Optional[Chord]] = [None] * len(sequence)
    for t, histogram in enumerate(sequence.histograms):
        step = engine.observe_bar(histogram)
        if t + 1 < len(sequence):
            predictions[t + 1] = step.predicted
    return predictions


def prediction_accuracy(
    predictions: Sequence[Optional[Chord]],
    chords: Sequence[Chord],
    start: int = 1,
    stop: Optional[int] = None,
) -> float:
    """Fraction of bars in [start, stop) predicted exactly."""
    if stop is None:
        stop = len(chords)
    if not 0 <= start < stop <= len(chords):
        raise ValueError(f"empty or out-of-range window [{start}, {stop})")
    window = range(start, stop)
    return sum(predictions[t] == chords[t] for t in window) / len(window)


def _vocabulary_for(setting: str) -> ChordVocabulary:
    if setting == "hmm_vom_60":
        return ChordVocabulary.full60()
    return ChordVocabulary.diatonic_c7()


def _song_evaluator(
    setting: str,
    train_sequences: Sequence[TrainingSequence],
    vocabulary: ChordVocabulary,
    alpha: float,
    epsilon: float,
) -> Callable[[TrainingSequence], float]:
    """Train once on the fold complement; return a per-song scorer."""
    if setting == "bayesian_band":
        band = train_bayesian_band(train_sequences, vocabulary, epsilon)

        def run_band(sequence: TrainingSequence) -> float:
            predictions = predict_song(BayesianBandSession(band), sequence)
            return prediction_accuracy(predictions, sequence.chords)

        return run_band

    model = train_model(train_sequences, vocabulary, epsilon)
    if setting == "hmm_inference":

        def run_decode(sequence: TrainingSequence) -> float:
            path = viterbi(list(sequence.histograms), model, alpha).path
            return sum(a == b for a, b in zip(path, sequence.chords)) / len(sequence)

        return run_decode

    def make_engine():
        if setting == "transition_only":
            return transition_baseline(model, alpha)
        if setting in ("hmm_vom_60", "hmm_vom_7"):
            return ChordPredictor(model, alpha)
        raise ValueError(f"unknown evaluation setting: {setting!r}")

    make_engine()  # validate the setting before the fold loop starts

    def run_live(sequence: TrainingSequence) -> float:
        predictions = predict_song(make_engine(), sequence)
        return prediction_accuracy(predictions, sequence.chords)

    return run_live


def _folds(n_songs: int, k: int, seed: int) -> List[np.ndarray]:
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    if n_songs < k:
        raise ValueError(f"cannot split {n_songs} songs into {k} folds")
    order = np.random.default_rng(seed).permutation(n_songs)
    return np.array_split(order, k)


def cross_validate(
    sequences: Sequence[TrainingSequence],
    setting: str,
    k: int = 10,
    seed: int = 0,
    alpha: float = 0.5,
    epsilon: float = 1e-6,
) -> EvalReport:
    if setting not in SETTINGS:
        raise ValueError(f"unknown evaluation setting: {setting!r}")
    started = time.perf_counter()
    vocabulary = _vocabulary_for(setting)
    per_song: List[SongResult] = []
    fold_means: List[float] = []
    for fold in _folds(len(sequences), k, seed):
        held_out = set(int(i) for i in fold)
        train_sequences = [s for i, s in enumerate(sequences) if i not in held_out]
        evaluate = _song_evaluator(setting, train_sequences, vocabulary, alpha, epsilon)
        fold_scores = []
        for song_id in sorted(held_out):
            accuracy = evaluate(sequences[song_id])
            per_song.append(SongResult(song_id, accuracy))
            fold_scores.append(accuracy)
        fold_means.append(float(np.mean(fold_scores)))
    per_song.sort(key=lambda r: r.song_id)
    return EvalReport(
        setting=setting,
        per_song=tuple(per_song),
        mean_accuracy=float(np.mean([r.accuracy for r in per_song])),
        fold_means=tuple(fold_means),
        runtime_seconds=time.perf_counter() - started,
    )


def half_half(
    sequences: Sequence[TrainingSequence],
    k: int = 10,
    seed: int = 0,
    alpha: float = 0.5,
    epsilon: float = 1e-6,
) -> HalfHalfReport:
    """Score each song's first and second half separately.

    The engine runs continuously over the whole song; only the scoring
    window is split, at T // 2.  A song must be at least four bars long
    so both windows are non-empty.
    """
    started = time.perf_counter()
    vocabulary = ChordVocabulary.diatonic_c7()
    per_song: List[HalfHalfResult] = []
    for fold in _folds(len(sequences), k, seed):
        held_out = set(int(i) for i in fold)
        train_sequences = [s for i, s in enumerate(sequences) if i not in held_out]
        model = train_model(train_sequences, vocabulary, epsilon)
        for song_id in sorted(held_out):
            sequence = sequences[song_id]
            if len(sequence) < 4:
                raise ValueError(f"song {song_id} too short to split: {len(sequence)} bars")
            predictions = predict_song(ChordPredictor(model, alpha), sequence)
            midpoint = len(sequence) // 2
            per_song.append(
                HalfHalfResult(
                    song_id,
                    prediction_accuracy(predictions, sequence.chords, 1, midpoint),
                    prediction_accuracy(predictions, sequence.chords, midpoint),
                )
            )
    per_song.sort(key=lambda r: r.song_id)
    return HalfHalfReport(
        per_song=tuple(per_song),
        mean_first=float(np.mean([r.first_half for r in per_song])),
        mean_second=float(np.mean([r.second_half for r in per_song])),
        runtime_seconds=time.perf_counter() - started,
    )


@dataclass(frozen=True)
class LatencyReport:
    kernel: str
    bars: int
    p50_ms: float
    p95_ms: float
    max_ms: float
    per_bar_ms: Tuple[float, ...]


def latency_benchmark(
    model: HmmModel,
    sequence: TrainingSequence,
    alpha: float = 0.5,
    kernel: Optional[str] = None,
) -> LatencyReport:
    """Latency of every observe call over one song, on one kernel."""
    predictor = ChordPredictor(model, alpha, kernel=kernel)
    for histogram in sequence.histograms:
        predictor.observe_bar(histogram)
    latencies = [step.latency_ms for step in predictor.trace]
    return LatencyReport(
        kernel=kernel or active_kernel_name(),
        bars=len(latencies),
        p50_ms=float(np.percentile(latencies, 50)),
        p95_ms=float(np.percentile(latencies, 95)),
        max_ms=float(max(latencies)),
        per_bar_ms=tuple(latencies),
    )
