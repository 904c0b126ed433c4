"""Corpus pipeline tests: transposition, filtering, sequence extraction
and the manifest round trip.

Transposition expectations are worked out by hand (D major melody down a
tone, E minor onto A minor, a G segment within a modulating score), not
read back from the implementation.
"""

from fractions import Fraction

import pytest

from jamcomp.corpus import (
    CorpusError,
    FilterPolicy,
    ManifestEntry,
    filter_score,
    ingest_paths,
    load_corpus,
    prepare_score,
    read_manifest,
    to_training_sequence,
    transpose_to_c,
    write_manifest,
)
from jamcomp.music import Bar, Chord, ChordQuality, ChordVocabulary, NoteEvent, PitchClass
from jamcomp.musicxml import KeySegment, Score, write_musicxml


def _chord(name_root: int, quality=ChordQuality.MAJOR) -> Chord:
    return Chord(PitchClass(name_root), quality)


def _bar(index: int, *pitches: int) -> Bar:
    step = Fraction(4, max(len(pitches), 1))
    return Bar(
        index,
        tuple(
            NoteEvent(p, i * step, step) for i, p in enumerate(pitches)
        ),
    )


def _score(bars, harmony, segments, title="fixture") -> Score:
    return Score(title=title, bars=list(bars), harmony=list(harmony), key_segments=list(segments))


DIATONIC = ChordVocabulary.diatonic_c7()
FULL = ChordVocabulary.full60()


class TestTransposeToC:
    def test_d_major_shifts_down_a_tone(self):
        score = _score(
            bars=[_bar(0, 62, 66, 69), _bar(1, 64)],
            harmony=[(0, _chord(2)), (1, _chord(9, ChordQuality.MINOR))],
            segments=[KeySegment(0, PitchClass(2), "major")],
        )
        moved = transpose_to_c(score)
        assert [n.pitch for n in moved.bars[0].notes] == [60, 64, 67]
        assert [n.pitch for n in moved.bars[1].notes] == [62]
        assert moved.harmony == [(0, _chord(0)), (1, _chord(7, ChordQuality.MINOR))]
        assert moved.key_segments == [KeySegment(0, PitchClass(0), "major")]

    def test_minor_key_lands_on_a(self):
        # E minor shifts down 7: tonic E(4) -> A(9).
        score = _score(
            bars=[_bar(0, 64, 67), _bar(1, 71)],
            harmony=[(0, _chord(4, ChordQuality.MINOR)), (1, _chord(11))],
            segments=[KeySegment(0, PitchClass(4), "minor")],
        )
        moved = transpose_to_c(score)
        assert [n.pitch for n in moved.bars[0].notes] == [57, 60]
        assert [n.pitch for n in moved.bars[1].notes] == [64]
        assert moved.harmony == [(0, _chord(9, ChordQuality.MINOR)), (1, _chord(4))]

    def test_each_segment_shifts_independently(self):
        # C major for two bars, then G major: only the G segment moves.
        score = _score(
            bars=[_bar(0, 60), _bar(1, 64), _bar(2, 67), _bar(3, 74)],
            harmony=[(0, _chord(0)), (2, _chord(7)), (3, _chord(2, ChordQuality.MINOR))],
            segments=[KeySegment(0, PitchClass(0), "major"), KeySegment(2, PitchClass(7), "major")],
        )
        moved = transpose_to_c(score)
        assert [b.notes[0].pitch for b in moved.bars] == [60, 64, 60, 67]
        assert moved.harmony == [(0, _chord(0)), (2, _chord(0)), (3, _chord(7, ChordQuality.MINOR))]
        assert moved.key_segments == [KeySegment(0, PitchClass(0), "major")]

    def test_idempotent(self):
        score = _score(
            bars=[_bar(0, 62), _bar(1, 66)],
            harmony=[(0, _chord(2))],
            segments=[KeySegment(0, PitchClass(2), "major")],
        )
        once = transpose_to_c(score)
        twice = transpose_to_c(once)
        assert once.bars == twice.bars
        assert once.harmony == twice.harmony
        assert once.key_segments == twice.key_segments

    def test_low_pitches_wrap_up_an_octave(self):
        score = _score(
            bars=[_bar(0, 1, 60), _bar(1, 62)],
            harmony=[(0, _chord(11))],
            segments=[KeySegment(0, PitchClass(11), "major")],
        )
        moved = transpose_to_c(score)
        # 1 - 11 would be negative, so it comes back up an octave.
        assert [n.pitch for n in moved.bars[0].notes] == [2, 49]


class TestFilterScore:
    def _plain(self, harmony, segments=None, n_bars=2):
        return _score(
            bars=[_bar(i, 60) for i in range(n_bars)],
            harmony=harmony,
            segments=segments or [KeySegment(0, PitchClass(0), "major")],
        )

    def test_accepts_diatonic_two_bars(self):
        decision = filter_score(
            self._plain([(0, _chord(0)), (1, _chord(7))]), FilterPolicy(DIATONIC)
        )
        assert decision.accepted
        assert decision.reason is None

    def test_rejects_empty_harmony(self):
        decision = filter_score(self._plain([]), FilterPolicy(DIATONIC))
        assert not decision.accepted
        assert decision.reason == "no harmony annotations"

    def test_rejects_single_bar(self):
        decision = filter_score(
            self._plain([(0, _chord(0))], n_bars=1), FilterPolicy(DIATONIC)
        )
        assert decision.reason == "fewer than two bars"

    def test_rejects_out_of_vocabulary_chord(self):
        decision = filter_score(
            self._plain([(0, _chord(0)), (1, _chord(1))]), FilterPolicy(DIATONIC)
        )
        assert not decision.accepted
        assert "C#major" in decision.reason and "bar 1" in decision.reason

    def test_vocabulary_check_happens_after_transposition(self):
        # A D major chord in a D major score is diatonic once moved to C.
        score = _score(
            bars=[_bar(0, 62), _bar(1, 69)],
            harmony=[(0, _chord(2)), (1, _chord(9))],
            segments=[KeySegment(0, PitchClass(2), "major")],
        )
        assert filter_score(score, FilterPolicy(DIATONIC)).accepted

    def test_rejects_too_many_changes_per_bar(self):
        decision = filter_score(
            self._plain([(0, _chord(0)), (1, _chord(7)), (1, _chord(9, ChordQuality.MINOR))]),
            FilterPolicy(DIATONIC),
        )
        assert not decision.accepted
        assert decision.reason == "bar 1 has 2 chord changes (max 1)"

    def test_allows_two_changes_when_policy_relaxed(self):
        decision = filter_score(
            self._plain([(0, _chord(0)), (1, _chord(7)), (1, _chord(9, ChordQuality.MINOR))]),
            FilterPolicy(DIATONIC, max_chord_changes_per_bar=2),
        )
        assert decision.accepted

    def test_repeated_annotation_is_not_a_change(self):
        decision = filter_score(
            self._plain([(0, _chord(0)), (1, _chord(0)), (1, _chord(7))]),
            FilterPolicy(DIATONIC),
        )
        # Bar 1 re-states C before moving to G: only one actual change.
        assert decision.accepted

    def test_modulation_policy(self):
        score = _score(
            bars=[_bar(0, 60), _bar(1, 67)],
            harmony=[(0, _chord(0)), (1, _chord(7))],
            segments=[KeySegment(0, PitchClass(0), "major"), KeySegment(1, PitchClass(7), "major")],
        )
        assert not filter_score(score, FilterPolicy(DIATONIC, allow_key_modulation=False)).accepted
        assert filter_score(score, FilterPolicy(FULL)).accepted

    def test_policy_validates_change_budget(self):
        with pytest.raises(ValueError):
            FilterPolicy(DIATONIC, max_chord_changes_per_bar=3)


class TestToTrainingSequence:
    def test_carry_forward(self):
        score = _score(
            bars=[_bar(0, 60), _bar(1, 64), _bar(2, 67), _bar(3, 65)],
            harmony=[(0, _chord(0)), (2, _chord(7))],
            segments=[KeySegment(0, PitchClass(0), "major")],
        )
        sequence = to_training_sequence(score)
        assert list(sequence.chords) == [_chord(0), _chord(0), _chord(7), _chord(7)]
        assert len(sequence) == 4

    def test_first_annotation_wins_the_barline(self):
        # Bar 1 carries G into bar 2 even though bar 1 starts on F.
        score = _score(
            bars=[_bar(0, 60), _bar(1, 65), _bar(2, 67)],
            harmony=[(0, _chord(0)), (1, _chord(5)), (1, _chord(7)), (2, _chord(0))],
            segments=[KeySegment(0, PitchClass(0), "major")],
        )
        sequence = to_training_sequence(score)
        assert list(sequence.chords) == [_chord(0), _chord(5), _chord(0)]

    def test_mid_bar_chord_becomes_next_bar_state(self):
        score = _score(
            bars=[_bar(0, 60), _bar(1, 65), _bar(2, 67)],
            harmony=[(0, _chord(0)), (1, _chord(5)), (1, _chord(7))],
            segments=[KeySegment(0, PitchClass(0), "major")],
        )
        sequence = to_training_sequence(score)
        assert list(sequence.chords) == [_chord(0), _chord(5), _chord(7)]

    def test_histograms_come_from_bars(self):
        score = _score(
            bars=[_bar(0, 60, 64), _bar(1, 67)],
            harmony=[(0, _chord(0))],
            segments=[KeySegment(0, PitchClass(0), "major")],
        )
        sequence = to_training_sequence(score)
        assert sequence.histograms[0].mass[0] == pytest.approx(0.5)
        assert sequence.histograms[0].mass[4] == pytest.approx(0.5)
        assert sequence.histograms[1].mass[7] == pytest.approx(1.0)

    def test_unannotated_opening_bar_fails(self):
        score = _score(
            bars=[_bar(0, 60), _bar(1, 64)],
            harmony=[(1, _chord(0))],
            segments=[KeySegment(0, PitchClass(0), "major")],
        )
        with pytest.raises(CorpusError, match="bar 0"):
            to_training_sequence(score)


class TestManifestAndIngest:
    def _write_song(self, tmp_path, name, score):
        path = tmp_path / name
        path.write_text(write_musicxml(score), encoding="utf-8")
        return str(path)

    def test_manifest_round_trip(self, tmp_path):
        entries = [
            ManifestEntry("a.xml", "accepted"),
            ManifestEntry("b.xml", "rejected", "no harmony annotations"),
        ]
        path = tmp_path / "manifest.ndjson"
        write_manifest(entries, str(path))
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert '"reason"' not in lines[0]
        assert read_manifest(str(path)) == entries

    def test_read_manifest_rejects_bad_lines(self, tmp_path):
        path = tmp_path / "broken.ndjson"
        path.write_text('{"path": "a.xml"}\n')
        with pytest.raises(CorpusError, match="line 1"):
            read_manifest(str(path))
        path.write_text("not json\n")
        with pytest.raises(CorpusError, match="not JSON"):
            read_manifest(str(path))

    def test_ingest_and_load_corpus(self, tmp_path):
        good = _score(
            bars=[_bar(0, 62, 66), _bar(1, 69)],
            harmony=[(0, _chord(2)), (1, _chord(9))],
            segments=[KeySegment(0, PitchClass(2), "major")],
            title="good",
        )
        chromatic = _score(
            bars=[_bar(0, 60), _bar(1, 61)],
            harmony=[(0, _chord(0)), (1, _chord(1))],
            segments=[KeySegment(0, PitchClass(0), "major")],
            title="chromatic",
        )
        unannotated = _score(
            bars=[_bar(0, 60), _bar(1, 62)],
            harmony=[(1, _chord(0))],
            segments=[KeySegment(0, PitchClass(0), "major")],
            title="late harmony",
        )
        paths = [
            self._write_song(tmp_path, "good.xml", good),
            self._write_song(tmp_path, "chromatic.xml", chromatic),
            self._write_song(tmp_path, "late.xml", unannotated),
            str(tmp_path / "missing.xml"),
        ]
        policy = FilterPolicy(DIATONIC)
        entries = ingest_paths(paths, policy)
        assert [e.status for e in entries] == ["accepted", "rejected", "rejected", "rejected"]
        assert "C#major" in entries[1].reason
        assert "bar 0" in entries[2].reason
        manifest = tmp_path / "manifest.ndjson"
        write_manifest(entries, str(manifest))
        corpus = load_corpus(str(manifest), policy)
        assert len(corpus) == 1
        path, sequence = corpus[0]
        assert path.endswith("good.xml")
        # D major fixture arrives transposed: D -> C, the dominant A -> G.
        assert list(sequence.chords) == [_chord(0), _chord(7)]

    def test_prepare_score_returns_sequence_for_accepted(self):
        score = _score(
            bars=[_bar(0, 60), _bar(1, 67)],
            harmony=[(0, _chord(0)), (1, _chord(7))],
            segments=[KeySegment(0, PitchClass(0), "major")],
        )
        sequence, decision = prepare_score(score, FilterPolicy(DIATONIC))
        assert decision.accepted
        assert list(sequence.chords) == [_chord(0), _chord(7)]

    def test_prepare_score_rejects_unannotated_bar_zero(self):
        score = _score(
            bars=[_bar(0, 60), _bar(1, 64)],
            harmony=[(1, _chord(0))],
            segments=[KeySegment(0, PitchClass(0), "major")],
        )
        sequence, decision = prepare_score(score, FilterPolicy(DIATONIC))
        assert sequence is None
        assert "bar 0" in decision.reason
