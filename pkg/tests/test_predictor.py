"""Prediction engine tests.

The hybrid engine's route switching is pinned by a hand trace: an empty
tree forces the transition fallback on the first bars, and the tree
takes over exactly when the chord context has repeated once.  The
trigram baseline's blend is checked at algebraic fixed points.
"""

import math

import numpy as np
import pytest

from jamcomp.music import Chord, ChordQuality, ChordVocabulary, PitchClass, PitchHistogram
from jamcomp.predictor import (
    BayesianBandSession,
    ChordPredictor,
    blended_note_probability,
    dominant_pitch_class,
    train_bayesian_band,
    transition_baseline,
)
from jamcomp.synth import SynthSpec, generate_song
from jamcomp.training import train_model

DIATONIC = ChordVocabulary.diatonic_c7()
C, Dm, Em, F, G, Am, Bdim = DIATONIC.chords


def _train_on(progression, repetitions=8, n_songs=4, root_only=True, sharpness=1.0):
    sequences = []
    for seed in range(n_songs):
        _, seq = generate_song(
            SynthSpec(progression, repetitions, seed=seed, root_only=root_only,
                      profile_sharpness=sharpness)
        )
        sequences.append(seq)
    return train_model(sequences, DIATONIC)


def _song(progression, repetitions, seed=0, root_only=True):
    return generate_song(
        SynthSpec(progression, repetitions, seed=seed, root_only=root_only)
    )[1]


class TestChordPredictor:
    def test_first_bars_use_fallback_then_tree_takes_over(self):
        model = _train_on((C, G))
        predictor = ChordPredictor(model)
        sequence = _song((C, G), 6)
        steps = [predictor.observe_bar(h) for h in sequence.histograms]
        assert [s.source for s in steps[:2]] == ["fallback", "fallback"]
        # From bar 2 the one-bar context has a continuation on record.
        assert all(s.source == "vom" for s in steps[2:])

    def test_fallback_is_the_transition_row_argmax(self):
        model = _train_on((C, G, Am, F))
        predictor = ChordPredictor(model)
        histogram = PitchHistogram.one_hot(0)
        step = predictor.observe_bar(histogram)
        assert step.inferred == C
        assert step.source == "fallback"
        assert step.predicted == predictor.transition_argmax(C)
        # Trained on C -> G bigrams only, the row argmax from C must be G.
        assert step.predicted == G

    def test_periodic_progression_locks_on(self):
        progression = (C, Am, F, G)
        model = _train_on(progression)
        predictor = ChordPredictor(model)
        sequence = _song(progression, 8)
        truth = list(sequence.chords)
        predictions = {}
        for t, histogram in enumerate(sequence.histograms):
            step = predictor.observe_bar(histogram)
            predictions[t + 1] = step.predicted
            assert step.inferred == truth[t]
        period = len(progression)
        for bar in range(2 * period, len(truth)):
            assert predictions[bar] == truth[bar], f"bar {bar}"

    def test_trace_records_every_bar_in_order(self):
        model = _train_on((C, G))
        predictor = ChordPredictor(model)
        sequence = _song((C, G), 3)
        for histogram in sequence.histograms:
            predictor.observe_bar(histogram)
        assert [s.bar_index for s in predictor.trace] == list(range(6))
        assert all(s.latency_ms >= 0.0 for s in predictor.trace)
        assert predictor.bar_count == 6

    def test_inferred_sequence_matches_trace_on_stable_input(self):
        progression = (C, F, G)
        model = _train_on(progression)
        predictor = ChordPredictor(model)
        sequence = _song(progression, 4)
        for histogram in sequence.histograms:
            predictor.observe_bar(histogram)
        assert predictor.inferred_sequence() == list(sequence.chords)

    def test_transition_baseline_never_uses_the_tree(self):
        progression = (C, Am, F, G)
        model = _train_on(progression)
        baseline = transition_baseline(model)
        sequence = _song(progression, 6)
        steps = [baseline.observe_bar(h) for h in sequence.histograms]
        assert all(s.source == "fallback" for s in steps)
        for step in steps:
            assert step.predicted == baseline.transition_argmax(step.inferred)

    def test_max_context_bounds_the_tree_depth(self):
        model = _train_on((C, G))
        predictor = ChordPredictor(model, max_context=2)
        sequence = _song((C, G), 10)
        for histogram in sequence.histograms:
            predictor.observe_bar(histogram)
        assert predictor._tree.max_depth == 2


class TestDominantPitchClass:
    def test_heaviest_class_wins(self):
        histogram = PitchHistogram.one_hot(7)
        assert dominant_pitch_class(histogram) == 7

    def test_ties_take_the_lowest_class(self):
        mass = [0.0] * 12
        mass[4] = 0.5
        mass[9] = 0.5
        assert dominant_pitch_class(PitchHistogram(tuple(mass))) == 4

    def test_silent_bar_has_no_dominant_class(self):
        assert dominant_pitch_class(PitchHistogram.silent_bar()) is None


class TestBlend:
    def test_small_context_returns_corpus_probability(self):
        assert blended_note_probability(0.3, 0.9, 0, 1.0) == 0.3
        assert blended_note_probability(0.3, 0.9, 1, 1.0) == 0.3

    def test_agreeing_ratio_is_a_fixed_point(self):
        for count in (2, 5, 100):
            assert blended_note_probability(0.25, 0.25, count, 1.0) == pytest.approx(0.25)

    def test_known_value(self):
        # weight = 1 * ln(e) = 1, so (0.2 + 1) / 2.
        assert blended_note_probability(0.2, 1.0, math.e, 1.0) == pytest.approx(0.6)

    def test_zero_novelty_disables_the_session_term(self):
        assert blended_note_probability(0.4, 1.0, 50, 0.0) == 0.4

    def test_weight_grows_toward_the_session_ratio(self):
        low = blended_note_probability(0.1, 0.9, 2, 1.0)
        high = blended_note_probability(0.1, 0.9, 1000, 1.0)
        assert 0.1 < low < high < 0.9


class TestBayesianBand:
    def _histograms(self, pcs):
        return [PitchHistogram.one_hot(pc) for pc in pcs]

    def test_training_counts_note_and_chord_trigrams(self):
        sequence = _song((C, G, Am, F), 2)
        model = train_bayesian_band([sequence], DIATONIC)
        # Root-only notes run 0, 7, 9, 5; chords run C, G, Am, F.
        notes = model.note_conditional(0, 7)
        assert int(np.argmax(notes)) == 9
        assert notes[9] == pytest.approx(1.0, abs=1e-4)
        assert notes.sum() == pytest.approx(1.0, abs=1e-9)
        # Am follows the C, G bigram when Am's bar sounds its root.
        row = model.chord_conditional(9, 0, 4)
        assert int(np.argmax(row)) == 5
        assert row[5] == pytest.approx(1.0, abs=1e-4)
        assert row.sum() == pytest.approx(1.0, abs=1e-9)
        assert model.note_trigram.shape == (12, 12, 12)
        assert model.chord_table.shape == (12, 7, 7, 7)
        assert model.prior.sum() == pytest.approx(1.0)

    def test_warm_up_answers_the_prior_argmax(self):
        sequences = [_song((C, G, Am, F), 4)]
        model = train_bayesian_band(sequences, DIATONIC)
        session = BayesianBandSession(model)
        first = session.observe_bar(PitchHistogram.one_hot(0))
        second = session.observe_bar(PitchHistogram.one_hot(7))
        expected = DIATONIC.chords[int(np.argmax(model.prior))]
        assert first.predicted == expected
        assert second.predicted == expected
        assert first.source == second.source == "prior"

    def test_steady_state_blends_and_counts_realized_notes(self):
        model = train_bayesian_band([_song((C, G, Am, F), 4)], DIATONIC)
        session = BayesianBandSession(model)
        for pc in (0, 7, 9):
            step = session.observe_bar(PitchHistogram.one_hot(pc))
        assert step.source == "blend"
        # Counts hold realized note pairs and triples, updated after the
        # prediction that could have used them.
        assert session._pair_counts == {(0, 7): 1, (7, 9): 1}
        assert session._triple_counts == {(0, 7, 9): 1}

    def test_silent_bar_reuses_the_previous_note(self):
        model = train_bayesian_band([_song((C, G, Am, F), 4)], DIATONIC)
        session = BayesianBandSession(model)
        session.observe_bar(PitchHistogram.one_hot(9))
        assert session._last_note == 9
        session.observe_bar(PitchHistogram.silent_bar())
        assert session._last_note == 9

    def test_history_is_its_own_predictions(self):
        model = train_bayesian_band([_song((C, G, Am, F), 4)], DIATONIC)
        session = BayesianBandSession(model)
        steps = [session.observe_bar(PitchHistogram.one_hot(pc)) for pc in (0, 7, 9, 5)]
        picks = [DIATONIC.index_of(s.predicted) for s in steps]
        assert session._history == picks
