"""Synthetic song generator.

Periodic chord progressions with melodies drawn per note: with
probability `profile_sharpness` a chord tone, otherwise one of the nine
remaining pitch classes.  Sharpness 1.0 yields melodies that only ever
sound the accompanying triad, which is the regime where a trained model
should lock onto the progression exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np

from jamcomp.music import (
    Bar,
    Chord,
    ChordVocabulary,
    NoteEvent,
    PitchClass,
    bar_histogram,
)
from jamcomp.musicxml import KeySegment, Score
from jamcomp.training import TrainingSequence


@dataclass(frozen=True)
class SynthSpec:
    progression: Tuple[Chord, ...]
    repetitions: int
    notes_per_bar: int = 8
    profile_sharpness: float = 0.9
    seed: int = 0
    # One-hot melodies: every note is the chord root.
    root_only: bool = False

    def __post_init__(self):
        if len(self.progression) < 2:
            raise ValueError("progression must contain at least two chords")
        if self.repetitions < 2:
            raise ValueError(f"repetitions must be >= 2, got {self.repetitions}")
        if self.notes_per_bar < 1:
            raise ValueError(f"notes_per_bar must be >= 1, got {self.notes_per_bar}")
        if not 0.0 < self.profile_sharpness <= 1.0:
            raise ValueError(
                f"profile_sharpness must lie in (0, 1], got {self.profile_sharpness}"
            )


def generate_song(spec: SynthSpec) -> Tuple[Score, TrainingSequence]:
    """Deterministic in the seed: same spec, same song."""
    rng = np.random.default_rng(spec.seed)
    chords = list(spec.progression) * spec.repetitions
    step = Fraction(4, spec.notes_per_bar)
    bars: List[Bar] = []
    for bar_index, chord in enumerate(chords):
        triad = chord.triad_pitch_classes
        off_triad = [pc for pc in range(12) if pc not in triad]
        notes = []
        for slot in range(spec.notes_per_bar):
            if spec.root_only:
                pc = int(chord.root)
            elif rng.random() < spec.profile_sharpness:
                pc = triad[int(rng.integers(len(triad)))]
            else:
                pc = off_triad[int(rng.integers(len(off_triad)))]
            notes.append(NoteEvent(60 + pc, slot * step, step))
        bars.append(Bar(bar_index, tuple(notes)))
    score = Score(
        title=f"synthetic-{spec.seed}",
        bars=bars,
        harmony=[(i, chord) for i, chord in enumerate(chords)],
        key_segments=[KeySegment(0, PitchClass(0), "major")],
    )
    sequence = TrainingSequence(
        tuple(chords), tuple(bar_histogram(bar) for bar in bars)
    )
    return score, sequence


def random_progression(
    rng: np.random.Generator, period: int, vocabulary: ChordVocabulary
) -> Tuple[Chord, ...]:
    """A progression of `period` chords with no immediate repetition,
    including across the wrap back to the start."""
    pool = list(vocabulary)
    if period >= 2 and len(pool) < 2:
        raise ValueError("vocabulary too small for a non-repeating progression")
    chords: List[Chord] = [pool[int(rng.integers(len(pool)))]]
    while len(chords) < period:
        candidate = pool[int(rng.integers(len(pool)))]
        if candidate == chords[-1]:
            continue
        if len(chords) == period - 1 and candidate == chords[0]:
            continue
        chords.append(candidate)
    return tuple(chords)


@dataclass(frozen=True)
class SynthSong:
    spec: SynthSpec
    score: Score
    sequence: TrainingSequence


def make_corpus(
    n_songs: int,
    vocabulary: ChordVocabulary,
    period_range: Tuple[int, int] = (4, 8),
    repetitions: int = 8,
    notes_per_bar: int = 8,
    profile_sharpness: float = 0.9,
    seed: int = 0,
    root_only: bool = False,
) -> List[SynthSong]:
    """A reproducible batch of periodic songs; per-song seeds and
    progressions are drawn from one master generator."""
    if n_songs < 1:
        raise ValueError(f"n_songs must be >= 1, got {n_songs}")
    low, high = period_range
    if not 1 <= low <= high:
        raise ValueError(f"period_range must satisfy 1 <= low <= high, got {period_range}")
    master = np.random.default_rng(seed)
    songs: List[SynthSong] = []
    for _ in range(n_songs):
        period = int(master.integers(low, high + 1))
        progression = random_progression(master, period, vocabulary)
        spec = SynthSpec(
            progression=progression,
            repetitions=repetitions,
            notes_per_bar=notes_per_bar,
            profile_sharpness=profile_sharpness,
            seed=int(master.integers(0, 2**63)),
            root_only=root_only,
        )
        score, sequence = generate_song(spec)
        songs.append(SynthSong(spec, score, sequence))
    return songs
