"""Bar-by-bar chord prediction engines.

The main engine couples hidden-state inference with a growing memory of
its own inferences: each completed bar re-decodes the whole melody so
far, asks a variable-order tree what followed this chord context before,
and falls back to the trained transition row when the context is new.
Two baselines share the observe interface: one that always answers with
the transition row, and a note/chord-history trigram predictor that
blends corpus statistics with session counts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from jamcomp.music import Chord, ChordVocabulary, PitchHistogram
from jamcomp.training import HmmModel, TrainingSequence
from jamcomp.viterbi import viterbi
from jamcomp.vom import VomTree


@dataclass(frozen=True)
class PredictionStep:
    """One completed bar: what was inferred for it and what comes next.

    source records which route produced the prediction: "vom" for a
    matched context, "fallback" for the transition row, "prior" and
    "blend" for the trigram baseline's warm-up and steady state.
    """

    bar_index: int
    inferred: Chord
    predicted: Chord
    source: str
    latency_ms: float


class ChordPredictor:
    """Hybrid inference + variable-order prediction over a live melody.

    Each observe_bar call appends the bar's histogram, re-infers the
    best chord sequence for the full history, queries the context tree
    built from the previous bar's inference, then brings the tree up to
    date with the current one.  When re-decoding merely appended a chord
    the stored sequence is extended in place; when it revised earlier
    chords the tree is rebuilt, because stored contexts would otherwise
    describe a sequence that no longer exists.
    """

    def __init__(
        self,
        model: HmmModel,
        alpha: float = 0.5,
        max_context: Optional[int] = None,
        use_context_tree: bool = True,
        kernel: Optional[str] = None,
    ):
        self.model = model
        self.alpha = alpha
        self.max_context = max_context
        self.use_context_tree = use_context_tree
        self.kernel = kernel
        self._observations: List[PitchHistogram] = []
        self._tree = VomTree(max_depth=max_context)
        self._tree_sid: Optional[int] = None
        self._tree_sequence: Tuple[Chord, ...] = ()
        self.trace: List[PredictionStep] = []

    @property
    def bar_count(self) -> int:
        return len(self._observations)

    def inferred_sequence(self) -> List[Chord]:
        if not self._observations:
            return []
        return viterbi(self._observations, self.model, self.alpha, kernel=self.kernel).path

    def transition_argmax(self, chord: Chord) -> Chord:
        row = self.model.a[self.model.vocabulary.index_of(chord)]
        return self.model.vocabulary.chords[int(np.argmax(row))]

    def _remember(self, inferred: Tuple[Chord, ...]) -> None:
        if (
            self._tree_sid is not None
            and len(inferred) == len(self._tree_sequence) + 1
            and inferred[:-1] == self._tree_sequence
        ):
            self._tree.extend_sequence(self._tree_sid, inferred[-1])
        else:
            self._tree = VomTree(max_depth=self.max_context)
            self._tree_sid = self._tree.learn_sequence(inferred)
        self._tree_sequence = inferred

    def observe_bar(self, histogram: PitchHistogram) -> PredictionStep:
        start = time.perf_counter()
        self._observations.append(histogram)
        inferred = viterbi(
            self._observations, self.model, self.alpha, kernel=self.kernel
        ).path
        predicted: Optional[Chord] = None
        source = "fallback"
        if self.use_context_tree:
            predicted = self._tree.predict(inferred)
            if predicted is not None:
                source = "vom"
        if predicted is None:
            predicted = self.transition_argmax(inferred[-1])
        if self.use_context_tree:
            self._remember(tuple(inferred))
        latency_ms = (time.perf_counter() - start) * 1000.0
        step = PredictionStep(
            bar_index=len(self._observations) - 1,
            inferred=inferred[-1],
            predicted=predicted,
            source=source,
            latency_ms=latency_ms,
        )
        self.trace.append(step)
        return step


def transition_baseline(model: HmmModel, alpha: float = 0.5) -> ChordPredictor:
    """First-order baseline: infer, then always answer the transition row."""
    return ChordPredictor(model, alpha=alpha, use_context_tree=False)


def dominant_pitch_class(histogram: PitchHistogram) -> Optional[int]:
    """The bar's heaviest pitch class, lowest winning ties; None when silent."""
    if histogram.silent:
        return None
    return int(np.argmax(np.asarray(histogram.mass)))


def blended_note_probability(
    corpus_probability: float,
    session_ratio: float,
    context_count: float,
    novelty: float,
) -> float:
    """Blend a corpus note probability with a session-frequency ratio.

    The session weight is novelty times the natural log of how often the
    note pair has occurred this session; it is clamped to zero below two
    occurrences, so a barely-seen context cannot override the corpus.
    """
    if context_count < 2:
        return corpus_probability
    weight = novelty * math.log(context_count)
    return (corpus_probability + weight * session_ratio) / (1.0 + weight)


@dataclass
class BayesianBandModel:
    """Corpus statistics for the note-driven trigram baseline.

    note_trigram[a, b, o] counts bars whose dominant pitch class was a
    two bars back and b one bar back with o following; chord_table[o, i,
    j, k] counts bar triples where chord i preceded chord j and chord k
    followed while o was the dominant pitch class of k's bar.  prior is
    the smoothed chord frequency used during warm-up.
    """

    vocabulary: ChordVocabulary
    prior: np.ndarray
    note_trigram: np.ndarray
    chord_table: np.ndarray
    epsilon: float = 1e-6

    def note_conditional(self, prev_note: int, cur_note: int) -> np.ndarray:
        counts = self.note_trigram[prev_note, cur_note] + self.epsilon
        return counts / counts.sum()

    def chord_conditional(self, note: int, prev_index: int, cur_index: int) -> np.ndarray:
        counts = self.chord_table[note, prev_index, cur_index] + self.epsilon
        return counts / counts.sum()


def train_bayesian_band(
    sequences: Sequence[TrainingSequence],
    vocabulary: ChordVocabulary,
    epsilon: float = 1e-6,
) -> BayesianBandModel:
    n = len(vocabulary)
    note_trigram = np.zeros((12, 12, 12), dtype=np.float64)
    chord_table = np.zeros((12, n, n, n), dtype=np.float64)
    prior_counts = np.zeros(n, dtype=np.float64)
    for sequence in sequences:
        indices = [vocabulary.index_of(c) for c in sequence.chords]
        notes: List[int] = []
        last_note = 0
        for histogram in sequence.histograms:
            note = dominant_pitch_class(histogram)
            if note is None:
                note = last_note
            notes.append(note)
            last_note = note
        for index in indices:
            prior_counts[index] += 1.0
        for t in range(1, len(indices) - 1):
            note_trigram[notes[t - 1], notes[t], notes[t + 1]] += 1.0
            chord_table[notes[t + 1], indices[t - 1], indices[t], indices[t + 1]] += 1.0
    prior = (prior_counts + epsilon) / (prior_counts.sum() + n * epsilon)
    return BayesianBandModel(vocabulary, prior, note_trigram, chord_table, epsilon)


class BayesianBandSession:
    """Note-trigram baseline playing over its own chord stream.

    Each bar it hears the melody's dominant pitch class, guesses the
    next bar's pitch class by blending the corpus trigram with session
    pair/triple note counts, then answers the chord most likely to
    accompany that guess after the two chords it previously chose.  It
    never sees ground-truth chords, and counts are updated after each
    prediction, never before.
    """

    def __init__(self, model: BayesianBandModel, novelty: float = 1.0):
        self.model = model
        self.novelty = novelty
        self._notes: List[int] = []
        self._history: List[int] = []
        self._pair_counts: Dict[Tuple[int, int], int] = {}
        self._triple_counts: Dict[Tuple[int, int, int], int] = {}
        self._last_note = 0
        self.trace: List[PredictionStep] = []

    def observe_bar(self, histogram: PitchHistogram) -> PredictionStep:
        start = time.perf_counter()
        note = dominant_pitch_class(histogram)
        if note is None:
            note = self._last_note
        self._last_note = note
        self._notes.append(note)
        vocabulary = self.model.vocabulary
        if len(self._notes) < 2 or len(self._history) < 2:
            pick = int(np.argmax(self.model.prior))
            source = "prior"
        else:
            prev_note, cur_note = self._notes[-2], self._notes[-1]
            corpus = self.model.note_conditional(prev_note, cur_note)
            pair_count = self._pair_counts.get((prev_note, cur_note), 0)
            blended = np.empty(12)
            for o in range(12):
                ratio = (
                    self._triple_counts.get((prev_note, cur_note, o), 0) / pair_count
                    if pair_count
                    else 0.0
                )
                blended[o] = blended_note_probability(
                    float(corpus[o]), ratio, pair_count, self.novelty
                )
            guess = int(np.argmax(blended))
            prev_index, cur_index = self._history[-2], self._history[-1]
            pick = int(np.argmax(self.model.chord_conditional(guess, prev_index, cur_index)))
            source = "blend"
        if len(self._notes) >= 2:
            pair = (self._notes[-2], self._notes[-1])
            self._pair_counts[pair] = self._pair_counts.get(pair, 0) + 1
        if len(self._notes) >= 3:
            triple = (self._notes[-3], self._notes[-2], self._notes[-1])
            self._triple_counts[triple] = self._triple_counts.get(triple, 0) + 1
        believed = self._history[-1] if self._history else pick
        self._history.append(pick)
        latency_ms = (time.perf_counter() - start) * 1000.0
        step = PredictionStep(
            bar_index=len(self.trace),
            inferred=vocabulary.chords[believed],
            predicted=vocabulary.chords[pick],
            source=source,
            latency_ms=latency_ms,
        )
        self.trace.append(step)
        return step
