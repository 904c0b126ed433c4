"""Pitch, chord and histogram primitives."""

from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from jamcomp.music import (
    Bar,
    Chord,
    ChordQuality,
    ChordVocabulary,
    NoteEvent,
    PitchClass,
    PitchHistogram,
    UnknownChordKindError,
    bar_histogram,
    chord_from_name,
    pitch_class,
    simplify_chord,
)


class TestPitchClass:
    def test_midi_reduction(self):
        assert pitch_class(60) == 0
        assert pitch_class(61) == 1
        assert pitch_class(69) == 9
        assert pitch_class(0) == 0
        assert pitch_class(127) == 7

    def test_out_of_range_midi_rejected(self):
        with pytest.raises(ValueError):
            pitch_class(-1)
        with pytest.raises(ValueError):
            pitch_class(128)

    def test_value_range_enforced(self):
        with pytest.raises(ValueError):
            PitchClass(12)
        with pytest.raises(ValueError):
            PitchClass(-1)

    def test_names(self):
        assert PitchClass(0).name == "C"
        assert PitchClass(6).name == "F#"
        assert PitchClass(11).name == "B"


class TestChord:
    def test_id_formula(self):
        assert Chord(PitchClass(0), ChordQuality.MAJOR).id == 0
        assert Chord(PitchClass(0), ChordQuality.SUSPENDED).id == 4
        assert Chord(PitchClass(9), ChordQuality.MINOR).id == 46
        assert Chord(PitchClass(11), ChordQuality.DIMINISHED).id == 58

    def test_id_bijection_over_all_60(self):
        seen = set()
        for chord_id in range(60):
            chord = Chord.from_id(chord_id)
            assert chord.id == chord_id
            seen.add((int(chord.root), chord.quality))
        assert len(seen) == 60

    def test_bad_id_rejected(self):
        with pytest.raises(ValueError):
            Chord.from_id(60)
        with pytest.raises(ValueError):
            Chord.from_id(-1)

    def test_names_round_trip(self):
        for chord_id in range(60):
            chord = Chord.from_id(chord_id)
            assert chord_from_name(chord.name) == chord
        assert chord_from_name("F#minor").id == 6 * 5 + 1

    def test_ordering_follows_id(self):
        chords = [Chord.from_id(i) for i in range(60)]
        assert sorted(chords[::-1]) == chords

    def test_triad_pitch_classes(self):
        c = Chord(PitchClass(0), ChordQuality.MAJOR)
        assert c.triad_pitch_classes == (0, 4, 7)
        asus = Chord(PitchClass(9), ChordQuality.SUSPENDED)
        assert asus.triad_pitch_classes == (9, 2, 4)
        bdim = Chord(PitchClass(11), ChordQuality.DIMINISHED)
        assert bdim.triad_pitch_classes == (11, 2, 5)
        caug = Chord(PitchClass(0), ChordQuality.AUGMENTED)
        assert caug.triad_pitch_classes == (0, 4, 8)
        cmin = Chord(PitchClass(0), ChordQuality.MINOR)
        assert cmin.triad_pitch_classes == (0, 3, 7)


class TestVocabulary:
    def test_diatonic_c7_exact_order(self):
        vocab = ChordVocabulary.diatonic_c7()
        assert [c.name for c in vocab] == [
            "Cmajor", "Dminor", "Eminor", "Fmajor",
            "Gmajor", "Aminor", "Bdiminished",
        ]
        assert len(vocab) == 7

    def test_full60_in_id_order(self):
        vocab = ChordVocabulary.full60()
        assert len(vocab) == 60
        assert [c.id for c in vocab] == list(range(60))
        for i, chord in enumerate(vocab):
            assert vocab.index_of(chord) == i

    def test_membership(self):
        vocab = ChordVocabulary.diatonic_c7()
        assert Chord(PitchClass(0), ChordQuality.MAJOR) in vocab
        assert Chord(PitchClass(0), ChordQuality.MINOR) not in vocab
        with pytest.raises(KeyError):
            vocab.index_of(Chord(PitchClass(0), ChordQuality.MINOR))

    def test_from_mode(self):
        assert ChordVocabulary.from_mode("full60").mode == "full60"
        assert ChordVocabulary.from_mode("diatonic7").mode == "diatonic7"
        with pytest.raises(ValueError):
            ChordVocabulary.from_mode("pentatonic")


class TestNoteEvent:
    def test_validation(self):
        NoteEvent(60, Fraction(0), Fraction(1))
        with pytest.raises(ValueError):
            NoteEvent(128, Fraction(0), Fraction(1))
        with pytest.raises(ValueError):
            NoteEvent(60, Fraction(0), Fraction(0))
        with pytest.raises(ValueError):
            NoteEvent(60, Fraction(-1), Fraction(1))
        with pytest.raises(ValueError):
            NoteEvent(60, Fraction(0), Fraction(1), velocity=200)


class TestBarHistogram:
    def test_quarter_quarter_rest_half(self):
        # C4 quarter + E4 quarter + half rest: equal mass on pcs 0 and 4.
        bar = Bar(0, (
            NoteEvent(60, Fraction(0), Fraction(1)),
            NoteEvent(64, Fraction(1), Fraction(1)),
        ))
        hist = bar_histogram(bar)
        assert not hist.silent
        assert hist.mass[0] == pytest.approx(0.5, abs=1e-12)
        assert hist.mass[4] == pytest.approx(0.5, abs=1e-12)
        assert sum(hist.mass) == pytest.approx(1.0, abs=1e-9)

    def test_duration_weighting(self):
        # C4 half + G4 quarter: 2/3 vs 1/3.
        bar = Bar(0, (
            NoteEvent(60, Fraction(0), Fraction(2)),
            NoteEvent(67, Fraction(2), Fraction(1)),
        ))
        hist = bar_histogram(bar)
        assert hist.mass[0] == pytest.approx(2 / 3, abs=1e-12)
        assert hist.mass[7] == pytest.approx(1 / 3, abs=1e-12)

    def test_octaves_fold_together(self):
        bar = Bar(0, (
            NoteEvent(60, Fraction(0), Fraction(1)),
            NoteEvent(72, Fraction(1), Fraction(1)),
        ))
        hist = bar_histogram(bar)
        assert hist.mass[0] == pytest.approx(1.0, abs=1e-12)

    def test_silent_bar(self):
        hist = bar_histogram(Bar(3))
        assert hist.silent
        assert all(m == 0.0 for m in hist.mass)

    def test_histogram_validation(self):
        with pytest.raises(ValueError):
            PitchHistogram((0.5,) * 12)  # sums to 6
        with pytest.raises(ValueError):
            PitchHistogram((0.0,) * 12)  # zero mass but not flagged silent
        with pytest.raises(ValueError):
            PitchHistogram((1.0,) + (0.0,) * 11, silent=True)

    @given(st.lists(
        st.tuples(
            st.integers(min_value=0, max_value=127),
            st.fractions(min_value=Fraction(1, 8), max_value=Fraction(4)),
        ),
        min_size=0, max_size=12,
    ))
    def test_mass_sums_to_one_or_silent(self, note_specs):
        notes = tuple(
            NoteEvent(p, Fraction(i), d) for i, (p, d) in enumerate(note_specs)
        )
        hist = bar_histogram(Bar(0, notes))
        if notes:
            assert abs(sum(hist.mass) - 1.0) <= 1e-9
            assert not hist.silent
        else:
            assert hist.silent


class TestSimplifyChord:
    def test_kind_table(self):
        cases = {
            "major": ChordQuality.MAJOR,
            "major-sixth": ChordQuality.MAJOR,
            "major-seventh": ChordQuality.MAJOR,
            "major-ninth": ChordQuality.MAJOR,
            "dominant": ChordQuality.MAJOR,
            "dominant-ninth": ChordQuality.MAJOR,
            "dominant-11th": ChordQuality.MAJOR,
            "dominant-13th": ChordQuality.MAJOR,
            "power": ChordQuality.MAJOR,
            "minor": ChordQuality.MINOR,
            "minor-sixth": ChordQuality.MINOR,
            "minor-seventh": ChordQuality.MINOR,
            "minor-ninth": ChordQuality.MINOR,
            "minor-major": ChordQuality.MINOR,
            "augmented": ChordQuality.AUGMENTED,
            "augmented-seventh": ChordQuality.AUGMENTED,
            "diminished": ChordQuality.DIMINISHED,
            "diminished-seventh": ChordQuality.DIMINISHED,
            "half-diminished": ChordQuality.DIMINISHED,
            "suspended-second": ChordQuality.SUSPENDED,
            "suspended-fourth": ChordQuality.SUSPENDED,
        }
        for label, quality in cases.items():
            chord = simplify_chord(PitchClass(7), label)
            assert chord.quality is quality, label
            assert chord.root == 7

    def test_alterations_discarded(self):
        chord = simplify_chord(PitchClass(2), "minor-seventh", degree_alterations=[("add", 9)])
        assert chord == Chord(PitchClass(2), ChordQuality.MINOR)

    def test_unknown_kind_named_in_error(self):
        with pytest.raises(UnknownChordKindError, match="neapolitan"):
            simplify_chord(PitchClass(0), "neapolitan")
