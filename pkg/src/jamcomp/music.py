"""Pitch, chord and bar primitives shared by the whole package.

Pitches are MIDI numbers, reduced to pitch classes 0..11 (C = 0) whenever
harmony is concerned.  Chords are a root pitch class plus one of five
qualities, giving a fixed alphabet of 60 chords; a diatonic subset of 7
covers the usual C major material.  Melodies are grouped into bars and each
bar is summarised as a duration-weighted pitch-class histogram, which is
the only observation the inference layer ever sees.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Tuple

from jamcomp.errors import JamcompError

PC_NAMES = ("C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B")

#: Letter names of the untempered circle, for key signature arithmetic.
STEP_TO_PC = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}


class UnknownChordKindError(JamcompError):
    """A harmony kind label outside the supported table."""


class PitchClass(int):
    """An integer in [0, 11]; 0 is C."""

    def __new__(cls, value):
        value = int(value)
        if not 0 <= value <= 11:
            raise ValueError(f"pitch class out of range: {value}")
        return super().__new__(cls, value)

    @property
    def name(self) -> str:
        return PC_NAMES[self]

    def __repr__(self) -> str:
        return f"PitchClass({int(self)})"

    def __str__(self) -> str:
        return self.name


def pitch_class(midi_pitch: int) -> PitchClass:
    """Reduce a MIDI pitch 0..127 to its pitch class."""
    if not 0 <= midi_pitch <= 127:
        raise ValueError(f"MIDI pitch out of range: {midi_pitch}")
    return PitchClass(midi_pitch % 12)


class ChordQuality(enum.Enum):
    MAJOR = 0
    MINOR = 1
    AUGMENTED = 2
    DIMINISHED = 3
    SUSPENDED = 4

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> "ChordQuality":
        try:
            return cls[label.upper()]
        except KeyError:
            raise ValueError(f"unknown chord quality: {label!r}") from None


#: Triad tones as semitone offsets from the root.  The suspended triad is
#: the suspended-fourth form.
TRIAD_INTERVALS = {
    ChordQuality.MAJOR: (0, 4, 7),
    ChordQuality.MINOR: (0, 3, 7),
    ChordQuality.AUGMENTED: (0, 4, 8),
    ChordQuality.DIMINISHED: (0, 3, 6),
    ChordQuality.SUSPENDED: (0, 5, 7),
}


@dataclass(frozen=True)
class Chord:
    """A root pitch class plus quality; identified by a stable integer id.

    Ids enumerate roots in ascending pitch class and qualities in enum
    order within each root, so id = root * 5 + quality index, a bijection
    onto [0, 60).
    """

    root: PitchClass
    quality: ChordQuality

    def __post_init__(self):
        if not isinstance(self.root, PitchClass):
            object.__setattr__(self, "root", PitchClass(self.root))

    @property
    def id(self) -> int:
        return int(self.root) * 5 + self.quality.value

    @classmethod
    def from_id(cls, chord_id: int) -> "Chord":
        if not 0 <= chord_id < 60:
            raise ValueError(f"chord id out of range: {chord_id}")
        return cls(PitchClass(chord_id // 5), ChordQuality(chord_id % 5))

    @property
    def name(self) -> str:
        return f"{self.root.name}{self.quality.label}"

    @property
    def triad_pitch_classes(self) -> Tuple[PitchClass, ...]:
        return tuple(
            PitchClass((int(self.root) + iv) % 12)
            for iv in TRIAD_INTERVALS[self.quality]
        )

    def transpose(self, semitones: int) -> "Chord":
        return Chord(PitchClass((int(self.root) + semitones) % 12), self.quality)

    def __lt__(self, other: "Chord") -> bool:
        return self.id < other.id

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"Chord({self.name})"


def chord_from_name(name: str) -> Chord:
    """Inverse of Chord.name, e.g. 'F#minor' -> Chord."""
    for pc in range(11, -1, -1):  # two-char names first
        pc_name = PC_NAMES[pc]
        if name.startswith(pc_name) and (len(pc_name) == 2 or not name[1:2] == "#"):
            return Chord(PitchClass(pc), ChordQuality.from_label(name[len(pc_name):]))
    raise ValueError(f"unparseable chord name: {name!r}")


@dataclass(frozen=True)
class NoteEvent:
    """A melody note: MIDI pitch, onset and duration in quarter notes from
    the start of its bar, and a MIDI velocity."""

    pitch: int
    onset: Fraction
    duration: Fraction
    velocity: int = 64

    def __post_init__(self):
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"note pitch out of range: {self.pitch}")
        if not 0 <= self.velocity <= 127:
            raise ValueError(f"note velocity out of range: {self.velocity}")
        if self.onset < 0:
            raise ValueError(f"negative onset: {self.onset}")
        if self.duration <= 0:
            raise ValueError(f"non-positive duration: {self.duration}")

    @property
    def pitch_class(self) -> PitchClass:
        return pitch_class(self.pitch)


@dataclass(frozen=True)
class Bar:
    """One bar of melody.  A bar with no notes is silent."""

    index: int
    notes: Tuple[NoteEvent, ...] = ()

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"negative bar index: {self.index}")
        if not isinstance(self.notes, tuple):
            object.__setattr__(self, "notes", tuple(self.notes))

    @property
    def silent(self) -> bool:
        return not self.notes


@dataclass(frozen=True)
class PitchHistogram:
    """Duration-weighted pitch-class distribution of one bar.

    mass holds 12 non-negative weights summing to 1, except for a silent
    bar which carries an all-zero mass and silent=True.
    """

    mass: Tuple[float, ...]
    silent: bool = False

    def __post_init__(self):
        mass = tuple(float(m) for m in self.mass)
        object.__setattr__(self, "mass", mass)
        if len(mass) != 12:
            raise ValueError(f"histogram needs 12 entries, got {len(mass)}")
        if any(m < 0 for m in mass):
            raise ValueError("histogram mass must be non-negative")
        total = sum(mass)
        if self.silent:
            if total != 0.0:
                raise ValueError("silent histogram must carry zero mass")
        elif abs(total - 1.0) > 1e-9:
            raise ValueError(f"histogram mass sums to {total}, expected 1")

    @classmethod
    def one_hot(cls, pc: int) -> "PitchHistogram":
        mass = [0.0] * 12
        mass[int(PitchClass(pc))] = 1.0
        return cls(tuple(mass))

    @classmethod
    def silent_bar(cls) -> "PitchHistogram":
        return cls((0.0,) * 12, silent=True)


def bar_histogram(bar: Bar) -> PitchHistogram:
    """Histogram of a bar: each note credits its duration to its pitch
    class, then the weights are normalised.  Silent bars yield the zero
    histogram flagged silent."""
    if bar.silent:
        return PitchHistogram.silent_bar()
    weights = [Fraction(0)] * 12
    for note in bar.notes:
        weights[note.pitch_class] += Fraction(note.duration)
    total = sum(weights)
    return PitchHistogram(tuple(float(w / total) for w in weights))


class ChordVocabulary:
    """An ordered chord alphabet; model matrices are indexed by position.

    Two modes exist: the full 60-chord alphabet in id order, and the seven
    diatonic chords of C major.
    """

    FULL60 = "full60"
    DIATONIC7 = "diatonic7"

    def __init__(self, mode: str, chords: Sequence[Chord]):
        self.mode = mode
        self.chords: Tuple[Chord, ...] = tuple(chords)
        self._index = {c: i for i, c in enumerate(self.chords)}
        if len(self._index) != len(self.chords):
            raise ValueError("vocabulary contains duplicate chords")

    @classmethod
    def full60(cls) -> "ChordVocabulary":
        return cls(cls.FULL60, [Chord.from_id(i) for i in range(60)])

    @classmethod
    def diatonic_c7(cls) -> "ChordVocabulary":
        chords = [
            Chord(PitchClass(0), ChordQuality.MAJOR),
            Chord(PitchClass(2), ChordQuality.MINOR),
            Chord(PitchClass(4), ChordQuality.MINOR),
            Chord(PitchClass(5), ChordQuality.MAJOR),
            Chord(PitchClass(7), ChordQuality.MAJOR),
            Chord(PitchClass(9), ChordQuality.MINOR),
            Chord(PitchClass(11), ChordQuality.DIMINISHED),
        ]
        return cls(cls.DIATONIC7, chords)

    @classmethod
    def from_mode(cls, mode: str) -> "ChordVocabulary":
        if mode == cls.FULL60:
            return cls.full60()
        if mode == cls.DIATONIC7:
            return cls.diatonic_c7()
        raise ValueError(f"unknown vocabulary mode: {mode!r}")

    def index_of(self, chord: Chord) -> int:
        try:
            return self._index[chord]
        except KeyError:
            raise KeyError(f"chord {chord.name} not in {self.mode} vocabulary") from None

    def __contains__(self, chord: Chord) -> bool:
        return chord in self._index

    def __len__(self) -> int:
        return len(self.chords)

    def __iter__(self):
        return iter(self.chords)

    def __eq__(self, other) -> bool:
        return isinstance(other, ChordVocabulary) and self.chords == other.chords

    def __repr__(self) -> str:
        return f"ChordVocabulary({self.mode}, {len(self.chords)} chords)"


# Harmony kind labels reduced to the five qualities.  Extensions beyond the
# triad are dropped; labels starting with "dominant" all reduce to Major.
_KIND_TO_QUALITY = {
    "major": ChordQuality.MAJOR,
    "major-sixth": ChordQuality.MAJOR,
    "major-seventh": ChordQuality.MAJOR,
    "major-ninth": ChordQuality.MAJOR,
    "dominant": ChordQuality.MAJOR,
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


def simplify_chord(root: PitchClass, kind_label: str, degree_alterations: Iterable = ()) -> Chord:
    """Map a harmony annotation to its triad-level chord.

    Degree alterations are accepted for interface completeness and
    discarded.  Unknown kind labels raise UnknownChordKindError naming
    the offending label.
    """
    label = kind_label.strip()
    quality = _KIND_TO_QUALITY.get(label)
    if quality is None and label.startswith("dominant-"):
        quality = ChordQuality.MAJOR
    if quality is None:
        raise UnknownChordKindError(f"unsupported chord kind: {label!r}")
    return Chord(PitchClass(root), quality)
