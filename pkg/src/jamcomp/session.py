"""Live session protocol: newline-delimited JSON in, chord messages out.

One JSON object per line (or per socket frame, identical payloads).
Inbound: config {alpha, vocabulary, tempo_bpm}, note_on {pitch,
velocity, time_ms}, note_off {pitch, time_ms}, bar {index}.  Outbound:
chord {bar_index, root, quality, source, latency_ms} and error
{message}.  The client owns the clock: the engine never times bars
itself, it closes a bar when told one ended.

A malformed message draws an error and the session continues; a bar
before config or a non-increasing bar index draws an error and ends the
session.  Note durations are measured in client milliseconds; since bar
histograms are normalized, no tempo conversion is needed.  A note still
held when the bar closes is cut off at the last time seen, and its late
note_off is then ignored.
"""

from __future__ import annotations

import json
from typing import Callable, Dict, List, Optional, Tuple

from jamcomp.music import PitchHistogram
from jamcomp.predictor import ChordPredictor
from jamcomp.training import HmmModel


def _error(message: str) -> str:
    return json.dumps({"type": "error", "message": message})


class SessionHandler:
    """Protocol state machine for one session over any line transport."""

    def __init__(self, model: HmmModel, default_alpha: float = 0.5):
        self.model = model
        self.default_alpha = default_alpha
        self.predictor: Optional[ChordPredictor] = None
        self.aborted = False
        self._configured = False
        self._last_bar_index: Optional[int] = None
        self._open_notes: Dict[int, float] = {}
        self._mass = [0.0] * 12
        self._clock_ms = 0.0

    # ------------------------------------------------------------------
    def handle_line(self, line: str) -> List[str]:
        """Process one inbound frame; returns outbound frames in order."""
        if self.aborted:
            return []
        line = line.strip()
        if not line:
            return []
        try:
            message = json.loads(line)
        except json.JSONDecodeError:
            return [_error("message is not valid JSON")]
        if not isinstance(message, dict) or "type" not in message:
            return [_error("message must be an object with a type field")]
        kind = message["type"]
        handler = {
            "config": self._on_config,
            "note_on": self._on_note_on,
            "note_off": self._on_note_off,
            "bar": self._on_bar,
        }.get(kind)
        if handler is None:
            return [_error(f"unknown message type: {kind!r}")]
        return handler(message)

    # ------------------------------------------------------------------
    def _abort(self, message: str) -> List[str]:
        self.aborted = True
        return [_error(message)]

    def _number(self, message: dict, field: str) -> float:
        value = message.get(field)
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ValueError(f"{field} must be a number")
        return float(value)

    def _on_config(self, message: dict) -> List[str]:
        if self._configured:
            return [_error("config already received")]
        alpha = self.default_alpha
        if "alpha" in message:
            try:
                alpha = self._number(message, "alpha")
            except ValueError as exc:
                return [_error(str(exc))]
            if not 0.0 <= alpha <= 1.0:
                return [_error(f"alpha must lie in [0, 1], got {alpha}")]
        if "vocabulary" in message:
            if message["vocabulary"] != self.model.vocabulary.mode:
                return self._abort(
                    f"model serves vocabulary {self.model.vocabulary.mode!r}, "
                    f"not {message['vocabulary']!r}"
                )
        if "tempo_bpm" in message:
            try:
                tempo = self._number(message, "tempo_bpm")
            except ValueError as exc:
                return [_error(str(exc))]
            if tempo <= 0:
                return [_error(f"tempo_bpm must be positive, got {tempo}")]
        self.predictor = ChordPredictor(self.model, alpha)
        self._configured = True
        return []

    def _on_note_on(self, message: dict) -> List[str]:
        try:
            pitch = int(self._number(message, "pitch"))
            time_ms = self._number(message, "time_ms")
        except ValueError as exc:
            return [_error(str(exc))]
        if not 0 <= pitch <= 127:
            return [_error(f"pitch must lie in [0, 127], got {pitch}")]
        if time_ms < 0:
            return [_error(f"time_ms must be non-negative, got {time_ms}")]
        self._clock_ms = max(self._clock_ms, time_ms)
        if pitch in self._open_notes:
            # Re-pressed while sounding: bank what has sounded so far.
            self._close_note(pitch, time_ms)
        self._open_notes[pitch] = time_ms
        return []

    def _on_note_off(self, message: dict) -> List[str]:
        try:
            pitch = int(self._number(message, "pitch"))
            time_ms = self._number(message, "time_ms")
        except ValueError as exc:
            return [_error(str(exc))]
        self._clock_ms = max(self._clock_ms, time_ms)
        if pitch in self._open_notes:
            self._close_note(pitch, time_ms)
        # A note_off with no open note is the tail of a note already cut
        # off at a bar boundary; it is deliberately ignored.
        return []

    def _close_note(self, pitch: int, end_ms: float) -> None:
        started = self._open_notes.pop(pitch)
        duration = end_ms - started
        if duration > 0:
            self._mass[pitch % 12] += duration

    def _on_bar(self, message: dict) -> List[str]:
        if not self._configured:
            return self._abort("config required before the first bar")
        try:
            index = int(self._number(message, "index"))
        except ValueError as exc:
            return [_error(str(exc))]
        if self._last_bar_index is not None and index <= self._last_bar_index:
            return self._abort(
                f"bar index must increase: got {index} after {self._last_bar_index}"
            )
        self._last_bar_index = index
        for pitch in list(self._open_notes):
            self._close_note(pitch, self._clock_ms)
        histogram = self._take_histogram()
        step = self.predictor.observe_bar(histogram)
        return [
            json.dumps(
                {
                    "type": "chord",
                    "bar_index": index,
                    "root": int(step.predicted.root),
                    "quality": step.predicted.quality.label,
                    "source": step.source,
                    "latency_ms": step.latency_ms,
                }
            )
        ]

    def _take_histogram(self) -> PitchHistogram:
        total = sum(self._mass)
        if total <= 0:
            histogram = PitchHistogram.silent_bar()
        else:
            histogram = PitchHistogram(tuple(m / total for m in self._mass))
        self._mass = [0.0] * 12
        return histogram


def run_session(
    receive: Callable[[], Optional[str]],
    send: Callable[[str], None],
    model: HmmModel,
    alpha: float = 0.5,
) -> None:
    """Pump one session: receive() yields frames (None on end of input),
    send() delivers outbound frames.  Returns when input ends or the
    session aborts."""
    handler = SessionHandler(model, alpha)
    while True:
        line = receive()
        if line is None:
            return
        for frame in handler.handle_line(line):
            send(frame)
        if handler.aborted:
            return


def run_stdio_session(model: HmmModel, alpha: float = 0.5, stdin=None, stdout=None) -> None:
    """One session over standard streams, flushing after every frame so a
    piped client sees chords immediately."""
    import sys

    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    iterator = iter(stdin.readline, "")

    def receive() -> Optional[str]:
        line = next(iterator, None)
        return line

    def send(frame: str) -> None:
        stdout.write(frame + "\n")
        stdout.flush()

    run_session(receive, send, model, alpha)
