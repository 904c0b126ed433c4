"""MusicXML score model, parser and serialiser.

Covers the partwise subset this package trains from: note/pitch/duration,
rests, ties, divisions, key and time signatures, and harmony annotations
(root plus kind).  The first part containing pitched notes is taken as
the melody; harmony is collected from every part.  Compressed .mxl
containers are unpacked transparently.

Durations and onsets are exact Fractions in quarter-note units, so a
parse -> write -> parse round trip preserves rhythm bit for bit.
"""

from __future__ import annotations

import io
import zipfile
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import List, Optional, Tuple, Union
from xml.etree import ElementTree

from jamcomp.errors import JamcompError
from jamcomp.music import (
    STEP_TO_PC,
    Bar,
    Chord,
    ChordQuality,
    NoteEvent,
    PitchClass,
    UnknownChordKindError,
    simplify_chord,
)

#: Canonical kind label written for each quality; parsing maps each back.
_QUALITY_TO_KIND = {
    ChordQuality.MAJOR: "major",
    ChordQuality.MINOR: "minor",
    ChordQuality.AUGMENTED: "augmented",
    ChordQuality.DIMINISHED: "diminished",
    ChordQuality.SUSPENDED: "suspended-fourth",
}

#: Sharp spellings for pitch classes.
_PC_TO_STEP_ALTER = {
    0: ("C", 0), 1: ("C", 1), 2: ("D", 0), 3: ("D", 1), 4: ("E", 0),
    5: ("F", 0), 6: ("F", 1), 7: ("G", 0), 8: ("G", 1), 9: ("A", 0),
    10: ("A", 1), 11: ("B", 0),
}


class ScoreParseError(JamcompError):
    """A source file outside the supported MusicXML subset."""

    def __init__(self, message: str, bar_index: Optional[int] = None):
        if bar_index is not None:
            message = f"bar {bar_index}: {message}"
        super().__init__(message)
        self.bar_index = bar_index


@dataclass(frozen=True)
class KeySegment:
    """A key in force from start_bar until the next segment."""

    start_bar: int
    tonic: PitchClass
    mode: str  # "major" or "minor"

    def __post_init__(self):
        if self.mode not in ("major", "minor"):
            raise ValueError(f"unsupported mode: {self.mode!r}")


@dataclass
class Score:
    """A parsed melody with harmony annotations.

    harmony holds (bar_index, chord) pairs in bar order; a bar may carry
    more than one annotation.  key_segments is non-empty and starts at
    bar 0.
    """

    title: str
    bars: List[Bar]
    harmony: List[Tuple[int, Chord]]
    key_segments: List[KeySegment]
    divisions: int = 1
    time_signatures: List[Tuple[int, Tuple[int, int]]] = field(
        default_factory=lambda: [(0, (4, 4))]
    )

    def bar_count(self) -> int:
        return len(self.bars)


def _key_to_fifths(segment: KeySegment) -> int:
    tonic = int(segment.tonic)
    if segment.mode == "minor":
        tonic = (tonic - 9) % 12
    # Multiplying by 7 inverts the circle of fifths mod 12.
    return ((7 * tonic + 5) % 12) - 5


def _fifths_to_tonic(fifths: int, mode: str) -> PitchClass:
    base = (7 * fifths) % 12
    if mode == "minor":
        base = (base + 9) % 12
    return PitchClass(base)


def _read_source(source: Union[str, bytes, "io.IOBase"]) -> bytes:
    if isinstance(source, bytes):
        data = source
    elif hasattr(source, "read"):
        data = source.read()
        if isinstance(data, str):
            data = data.encode("utf-8")
    else:
        with open(source, "rb") as fh:
            data = fh.read()
    if data[:4] == b"PK\x03\x04":
        return _unpack_mxl(data)
    return data


def _unpack_mxl(data: bytes) -> bytes:
    with zipfile.ZipFile(io.BytesIO(data)) as archive:
        names = archive.namelist()
        target = None
        if "META-INF/container.xml" in names:
            container = ElementTree.fromstring(archive.read("META-INF/container.xml"))
            rootfile = container.find(".//rootfile")
            if rootfile is not None:
                target = rootfile.get("full-path")
        if target is None:
            candidates = [
                n for n in names
                if not n.startswith("META-INF") and n.lower().endswith((".xml", ".musicxml"))
            ]
            if not candidates:
                raise ScoreParseError("compressed container holds no score file")
            target = candidates[0]
        try:
            return archive.read(target)
        except KeyError:
            raise ScoreParseError(f"container names missing file {target!r}") from None


def _parse_harmony_element(element, bar_index: int) -> Chord:
    root_el = element.find("root")
    if root_el is None:
        raise ScoreParseError("harmony without root", bar_index)
    step = root_el.findtext("root-step")
    if step is None or step.strip() not in STEP_TO_PC:
        raise ScoreParseError(f"harmony root step {step!r}", bar_index)
    alter = int(float(root_el.findtext("root-alter") or "0"))
    kind = element.findtext("kind")
    if kind is None or not kind.strip():
        raise ScoreParseError("harmony without kind", bar_index)
    pc = PitchClass((STEP_TO_PC[step.strip()] + alter) % 12)
    try:
        return simplify_chord(pc, kind.strip(), element.findall("degree"))
    except UnknownChordKindError as exc:
        raise ScoreParseError(str(exc), bar_index) from exc


def _collect_harmony(parts, bar_limit: int) -> List[Tuple[int, Chord]]:
    entries: List[Tuple[int, int, Chord]] = []
    for part_order, part in enumerate(parts):
        for bar_index, measure in enumerate(part.findall("measure")):
            if bar_index >= bar_limit:
                break
            for element in measure.findall("harmony"):
                entries.append((bar_index, part_order, _parse_harmony_element(element, bar_index)))
    entries.sort(key=lambda e: (e[0], e[1]))
    harmony: List[Tuple[int, Chord]] = []
    for bar_index, _, chord in entries:
        if harmony and harmony[-1] == (bar_index, chord):
            continue  # the same annotation duplicated across parts
        harmony.append((bar_index, chord))
    return harmony


def parse_musicxml(source: Union[str, bytes, "io.IOBase"]) -> Score:
    """Parse a partwise MusicXML document (or .mxl container) into a Score.

    Anything outside the supported subset raises ScoreParseError naming
    the offending bar where one exists.
    """
    data = _read_source(source)
    try:
        root = ElementTree.fromstring(data)
    except ElementTree.ParseError as exc:
        raise ScoreParseError(f"malformed XML: {exc}") from exc
    if root.tag != "score-partwise":
        raise ScoreParseError(f"unsupported document root: {root.tag!r}")

    title = root.findtext("work/work-title") or root.findtext("movement-title") or ""
    parts = root.findall("part")
    if not parts:
        raise ScoreParseError("score has no parts")

    melody_part = None
    for part in parts:
        if part.find(".//note/pitch") is not None:
            melody_part = part
            break
    if melody_part is None:
        raise ScoreParseError("no part contains pitched notes")

    bars: List[Bar] = []
    key_segments: List[KeySegment] = []
    time_signatures: List[Tuple[int, Tuple[int, int]]] = []
    divisions: Optional[int] = None
    first_divisions: Optional[int] = None

    for bar_index, measure in enumerate(melody_part.findall("measure")):
        position = Fraction(0)
        previous_onset: Optional[Fraction] = None
        notes: List[NoteEvent] = []
        for element in measure:
            tag = element.tag
            if tag == "attributes":
                div_text = element.findtext("divisions")
                if div_text is not None:
                    divisions = int(div_text)
                    if divisions <= 0:
                        raise ScoreParseError(f"divisions must be positive: {divisions}", bar_index)
                    if first_divisions is None:
                        first_divisions = divisions
                key_el = element.find("key")
                if key_el is not None:
                    fifths_text = key_el.findtext("fifths")
                    if fifths_text is None:
                        raise ScoreParseError("key without fifths", bar_index)
                    mode = (key_el.findtext("mode") or "major").strip()
                    if mode not in ("major", "minor"):
                        raise ScoreParseError(f"unsupported mode: {mode!r}", bar_index)
                    key_segments.append(
                        KeySegment(bar_index, _fifths_to_tonic(int(fifths_text), mode), mode)
                    )
                time_el = element.find("time")
                if time_el is not None:
                    beats = time_el.findtext("beats")
                    beat_type = time_el.findtext("beat-type")
                    if beats and beat_type:
                        time_signatures.append((bar_index, (int(beats), int(beat_type))))
            elif tag == "note":
                if element.find("grace") is not None:
                    continue
                duration_text = element.findtext("duration")
                if duration_text is None:
                    raise ScoreParseError("note without duration", bar_index)
                if divisions is None:
                    raise ScoreParseError("note before any divisions declaration", bar_index)
                duration = Fraction(int(duration_text), divisions)
                if element.find("rest") is not None:
                    position += duration
                    continue
                pitch_el = element.find("pitch")
                if pitch_el is None:
                    raise ScoreParseError("note without pitch or rest", bar_index)
                step = pitch_el.findtext("step")
                octave_text = pitch_el.findtext("octave")
                if step is None or step.strip() not in STEP_TO_PC or octave_text is None:
                    raise ScoreParseError("incomplete pitch element", bar_index)
                alter = int(float(pitch_el.findtext("alter") or "0"))
                midi = 12 * (int(octave_text) + 1) + STEP_TO_PC[step.strip()] + alter
                in_chord = element.find("chord") is not None
                onset = previous_onset if (in_chord and previous_onset is not None) else position
                try:
                    notes.append(NoteEvent(midi, onset, duration))
                except ValueError as exc:
                    raise ScoreParseError(str(exc), bar_index) from exc
                if not in_chord:
                    previous_onset = position
                    position += duration
            elif tag in ("backup", "forward"):
                amount_text = element.findtext("duration")
                if amount_text is None or divisions is None:
                    raise ScoreParseError(f"{tag} without duration context", bar_index)
                amount = Fraction(int(amount_text), divisions)
                position = position - amount if tag == "backup" else position + amount
                if position < 0:
                    raise ScoreParseError("backup before the start of the bar", bar_index)
            # harmony is collected in a separate pass over all parts
        notes.sort(key=lambda n: (n.onset, n.pitch))
        bars.append(Bar(bar_index, tuple(notes)))

    if not bars:
        raise ScoreParseError("melody part has no measures")
    if not key_segments or key_segments[0].start_bar != 0:
        key_segments.insert(0, KeySegment(0, PitchClass(0), "major"))
    if not time_signatures or time_signatures[0][0] != 0:
        time_signatures.insert(0, (0, (4, 4)))

    harmony = _collect_harmony(parts, len(bars))
    return Score(
        title=title,
        bars=bars,
        harmony=harmony,
        key_segments=key_segments,
        divisions=first_divisions or 1,
        time_signatures=time_signatures,
    )


def _bar_quarters(time_signatures, bar_index: int) -> Fraction:
    active = (4, 4)
    for start, signature in time_signatures:
        if start <= bar_index:
            active = signature
        else:
            break
    beats, beat_type = active
    return Fraction(4 * beats, beat_type)


def write_musicxml(score: Score) -> str:
    """Serialise a Score to partwise MusicXML text.

    Gaps between notes become explicit rests so onsets survive a round
    trip; simultaneous onsets are encoded with the chord element.
    """
    denominators = [1]
    for bar in score.bars:
        for note in bar.notes:
            denominators.append(Fraction(note.onset).denominator)
            denominators.append(Fraction(note.duration).denominator)
    for index, _ in score.time_signatures:
        denominators.append(Fraction(_bar_quarters(score.time_signatures, index)).denominator)
    divisions = lcm(*denominators)

    def ticks(value: Fraction) -> int:
        return int(Fraction(value) * divisions)

    root = ElementTree.Element("score-partwise", version="3.1")
    work = ElementTree.SubElement(root, "work")
    ElementTree.SubElement(work, "work-title").text = score.title
    part_list = ElementTree.SubElement(root, "part-list")
    score_part = ElementTree.SubElement(part_list, "score-part", id="P1")
    ElementTree.SubElement(score_part, "part-name").text = "Melody"
    part = ElementTree.SubElement(root, "part", id="P1")

    keys_by_bar = {seg.start_bar: seg for seg in score.key_segments}
    times_by_bar = dict(score.time_signatures)
    harmony_by_bar: dict = {}
    for bar_index, chord in score.harmony:
        harmony_by_bar.setdefault(bar_index, []).append(chord)

    for bar in score.bars:
        measure = ElementTree.SubElement(part, "measure", number=str(bar.index + 1))
        needs_attributes = bar.index == 0 or bar.index in keys_by_bar or bar.index in times_by_bar
        if needs_attributes:
            attributes = ElementTree.SubElement(measure, "attributes")
            if bar.index == 0:
                ElementTree.SubElement(attributes, "divisions").text = str(divisions)
            segment = keys_by_bar.get(bar.index)
            if segment is not None:
                key_el = ElementTree.SubElement(attributes, "key")
                ElementTree.SubElement(key_el, "fifths").text = str(_key_to_fifths(segment))
                ElementTree.SubElement(key_el, "mode").text = segment.mode
            signature = times_by_bar.get(bar.index)
            if signature is not None:
                time_el = ElementTree.SubElement(attributes, "time")
                ElementTree.SubElement(time_el, "beats").text = str(signature[0])
                ElementTree.SubElement(time_el, "beat-type").text = str(signature[1])

        for chord in harmony_by_bar.get(bar.index, []):
            harmony_el = ElementTree.SubElement(measure, "harmony")
            root_el = ElementTree.SubElement(harmony_el, "root")
            step, alter = _PC_TO_STEP_ALTER[int(chord.root)]
            ElementTree.SubElement(root_el, "root-step").text = step
            if alter:
                ElementTree.SubElement(root_el, "root-alter").text = str(alter)
            ElementTree.SubElement(harmony_el, "kind").text = _QUALITY_TO_KIND[chord.quality]

        position = Fraction(0)
        previous_onset = None
        for note in sorted(bar.notes, key=lambda n: (n.onset, n.pitch)):
            if note.onset > position:
                _append_rest(measure, ticks(note.onset - position))
                position = note.onset
            in_chord = previous_onset is not None and note.onset == previous_onset
            if not in_chord and note.onset < position:
                backup = ElementTree.SubElement(measure, "backup")
                ElementTree.SubElement(backup, "duration").text = str(ticks(position - note.onset))
                position = note.onset
            note_el = ElementTree.SubElement(measure, "note")
            if in_chord:
                ElementTree.SubElement(note_el, "chord")
            pitch_el = ElementTree.SubElement(note_el, "pitch")
            step, alter = _PC_TO_STEP_ALTER[note.pitch % 12]
            ElementTree.SubElement(pitch_el, "step").text = step
            if alter:
                ElementTree.SubElement(pitch_el, "alter").text = str(alter)
            ElementTree.SubElement(pitch_el, "octave").text = str(note.pitch // 12 - 1)
            ElementTree.SubElement(note_el, "duration").text = str(ticks(note.duration))
            if not in_chord:
                previous_onset = note.onset
                position = note.onset + note.duration
        bar_length = _bar_quarters(score.time_signatures, bar.index)
        if position < bar_length:
            _append_rest(measure, ticks(bar_length - position))

    ElementTree.indent(root)
    body = ElementTree.tostring(root, encoding="unicode")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + body + "\n"


def _append_rest(measure, duration_ticks: int) -> None:
    if duration_ticks <= 0:
        return
    note_el = ElementTree.SubElement(measure, "note")
    ElementTree.SubElement(note_el, "rest")
    ElementTree.SubElement(note_el, "duration").text = str(duration_ticks)
