"""Melody-driven chord accompaniment.

The package listens to a melody one bar at a time, infers the chord
sequence behind it with a hidden Markov model, and predicts the next
chord with a variable-order Markov model grown from the inferred
sequence.  Corpus tooling, a synthetic-corpus generator, an evaluation
harness and a line-based session service round it out.
"""

from jamcomp.errors import JamcompError
from jamcomp.music import (
    Bar,
    Chord,
    ChordQuality,
    ChordVocabulary,
    NoteEvent,
    PitchClass,
    PitchHistogram,
    bar_histogram,
    pitch_class,
    simplify_chord,
)

__version__ = "0.1.0"

__all__ = [
    "Bar",
    "Chord",
    "ChordQuality",
    "ChordVocabulary",
    "JamcompError",
    "NoteEvent",
    "PitchClass",
    "PitchHistogram",
    "bar_histogram",
    "pitch_class",
    "simplify_chord",
    "__version__",
]
