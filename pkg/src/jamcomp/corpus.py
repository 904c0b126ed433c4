"""Corpus preparation: filtering, transposition and training extraction.

A raw score becomes training material in three steps: transpose every key
segment to C (minor segments land on A, the relative minor), check the
result against a filter policy (vocabulary membership, chord-change
density, modulation), and reduce the accepted score to one chord and one
histogram per bar.  An NDJSON manifest records each file's fate so a
corpus build is reproducible and auditable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

from jamcomp.errors import JamcompError
from jamcomp.music import Bar, Chord, ChordVocabulary, NoteEvent, PitchClass, bar_histogram
from jamcomp.musicxml import KeySegment, Score, ScoreParseError, parse_musicxml
from jamcomp.training import TrainingSequence


class CorpusError(JamcompError):
    """A score that cannot be reduced to a training sequence."""


@dataclass(frozen=True)
class FilterPolicy:
    """What a score must satisfy to enter the training corpus."""

    vocabulary: ChordVocabulary
    max_chord_changes_per_bar: int = 1
    allow_key_modulation: bool = True

    def __post_init__(self):
        if self.max_chord_changes_per_bar not in (1, 2):
            raise ValueError(
                f"max_chord_changes_per_bar must be 1 or 2, got {self.max_chord_changes_per_bar}"
            )


@dataclass(frozen=True)
class FilterDecision:
    accepted: bool
    reason: Optional[str] = None


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    status: str  # "accepted" | "rejected"
    reason: Optional[str] = None


def _segment_shift(segment: KeySegment) -> int:
    """Semitones to shift DOWN so the segment's scale content lands on C
    major; minor tonics map onto A."""
    tonic = int(segment.tonic)
    if segment.mode == "minor":
        return (tonic - 9) % 12
    return tonic


def _active_segment(segments: Sequence[KeySegment], bar_index: int) -> KeySegment:
    active = segments[0]
    for segment in segments:
        if segment.start_bar <= bar_index:
            active = segment
        else:
            break
    return active


def transpose_to_c(score: Score) -> Score:
    """Shift every key segment into C major.

    Notes move down by the segment shift (up an octave when that would
    leave MIDI range), harmony roots rotate by the same amount, and the
    result carries a single C major segment, making the operation
    idempotent.
    """
    segments = sorted(score.key_segments, key=lambda s: s.start_bar)
    new_bars: List[Bar] = []
    for bar in score.bars:
        shift = _segment_shift(_active_segment(segments, bar.index))
        if shift == 0:
            new_bars.append(bar)
            continue
        moved = []
        for note in bar.notes:
            pitch = note.pitch - shift
            if pitch < 0:
                pitch += 12
            moved.append(NoteEvent(pitch, note.onset, note.duration, note.velocity))
        new_bars.append(Bar(bar.index, tuple(moved)))
    new_harmony: List[Tuple[int, Chord]] = []
    for bar_index, chord in score.harmony:
        shift = _segment_shift(_active_segment(segments, bar_index))
        new_harmony.append((bar_index, chord.transpose(-shift)))
    return Score(
        title=score.title,
        bars=new_bars,
        harmony=new_harmony,
        key_segments=[KeySegment(0, PitchClass(0), "major")],
        divisions=score.divisions,
        time_signatures=list(score.time_signatures),
    )


def _chord_changes_by_bar(harmony: Sequence[Tuple[int, Chord]]):
    """Number of chord changes each annotated bar introduces, where a
    change means the active chord actually differs."""
    changes = {}
    current: Optional[Chord] = None
    for bar_index, chord in harmony:
        if chord != current:
            changes[bar_index] = changes.get(bar_index, 0) + 1
            current = chord
    return changes


def filter_score(score: Score, policy: FilterPolicy) -> FilterDecision:
    """Decide whether a score may join the corpus.

    The vocabulary and chord-change checks run on the C-transposed score,
    so a diatonic policy admits diatonic material in any key; the
    modulation check looks at the original key segments.
    """
    if not score.harmony:
        return FilterDecision(False, "no harmony annotations")
    if score.bar_count() < 2:
        return FilterDecision(False, "fewer than two bars")
    distinct_keys = {(s.tonic, s.mode) for s in score.key_segments}
    if not policy.allow_key_modulation and len(distinct_keys) > 1:
        return FilterDecision(False, "key modulation present")

    transposed = transpose_to_c(score)
    for bar_index, count in sorted(_chord_changes_by_bar(transposed.harmony).items()):
        if count > policy.max_chord_changes_per_bar:
            return FilterDecision(
                False,
                f"bar {bar_index} has {count} chord changes "
                f"(max {policy.max_chord_changes_per_bar})",
            )
    for bar_index, chord in transposed.harmony:
        if chord not in policy.vocabulary:
            return FilterDecision(
                False,
                f"chord {chord.name} at bar {bar_index} outside the "
                f"{policy.vocabulary.mode} vocabulary",
            )
    return FilterDecision(True)


def to_training_sequence(score: Score) -> TrainingSequence:
    """One chord and one histogram per bar.

    The chord of a bar is the one active at its start: a bar's first
    annotation takes effect at the barline, later annotations take effect
    only within the bar, and unannotated bars inherit the previous bar's
    final chord.  A score whose first bar carries no annotation cannot be
    reduced.
    """
    by_bar: dict = {}
    for bar_index, chord in score.harmony:
        by_bar.setdefault(bar_index, []).append(chord)
    chords: List[Chord] = []
    current: Optional[Chord] = None
    for bar in score.bars:
        annotations = by_bar.get(bar.index)
        if annotations:
            chords.append(annotations[0])
            current = annotations[-1]
        elif current is not None:
            chords.append(current)
        else:
            raise CorpusError(f"no chord annotation at or before bar {bar.index}")
    histograms = [bar_histogram(bar) for bar in score.bars]
    try:
        return TrainingSequence(tuple(chords), tuple(histograms))
    except ValueError as exc:
        raise CorpusError(str(exc)) from exc


def prepare_score(score: Score, policy: FilterPolicy):
    """Filter and reduce one score.  Returns (sequence, decision); the
    sequence is None when the decision rejects."""
    decision = filter_score(score, policy)
    if not decision.accepted:
        return None, decision
    try:
        sequence = to_training_sequence(transpose_to_c(score))
    except (CorpusError, ValueError) as exc:
        return None, FilterDecision(False, str(exc))
    return sequence, decision


def ingest_paths(paths: Iterable[str], policy: FilterPolicy) -> List[ManifestEntry]:
    """Parse, filter and record every file; parse failures reject with
    the parser's diagnostic."""
    entries: List[ManifestEntry] = []
    for path in paths:
        try:
            score = parse_musicxml(path)
        except (ScoreParseError, OSError) as exc:
            entries.append(ManifestEntry(str(path), "rejected", str(exc)))
            continue
        _, decision = prepare_score(score, policy)
        if decision.accepted:
            entries.append(ManifestEntry(str(path), "accepted"))
        else:
            entries.append(ManifestEntry(str(path), "rejected", decision.reason))
    return entries


def write_manifest(entries: Iterable[ManifestEntry], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            record = {"path": entry.path, "status": entry.status}
            if entry.reason is not None:
                record["reason"] = entry.reason
            fh.write(json.dumps(record) + "\n")


def read_manifest(path: str) -> List[ManifestEntry]:
    entries: List[ManifestEntry] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"manifest line {line_number} is not JSON: {exc}") from exc
            if "path" not in record or "status" not in record:
                raise CorpusError(f"manifest line {line_number} misses path/status")
            entries.append(ManifestEntry(record["path"], record["status"], record.get("reason")))
    return entries


def load_corpus(manifest_path: str, policy: FilterPolicy) -> List[Tuple[str, TrainingSequence]]:
    """Re-parse the accepted manifest entries into training sequences."""
    songs: List[Tuple[str, TrainingSequence]] = []
    for entry in read_manifest(manifest_path):
        if entry.status != "accepted":
            continue
        score = parse_musicxml(entry.path)
        sequence, decision = prepare_score(score, policy)
        if sequence is None:
            raise CorpusError(
                f"{entry.path} no longer passes the filter: {decision.reason}"
            )
        songs.append((entry.path, sequence))
    return songs
