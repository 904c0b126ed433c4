/** Page wiring: one form, one keyboard, one session at a time. */
import { ChordSounder } from "./audio";
import { chordLabel, chordTones, PITCH_CLASS_NAMES } from "./chords";
import { keyboardKeys, TYPING_MAP } from "./keyboard";
import {
  barDurationMs,
  connectAndConfigure,
  playLoop,
  InputValidationError,
  type UiSession,
} from "./session";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

const endpointInput = el<HTMLInputElement>("endpoint");
const alphaInput = el<HTMLInputElement>("alpha");
const vocabularySelect = el<HTMLSelectElement>("vocabulary");
const tempoInput = el<HTMLInputElement>("tempo");
const connectButton = el<HTMLButtonElement>("connect");
const formError = el<HTMLSpanElement>("form-error");
const statusPill = el<HTMLSpanElement>("status");
const playButton = el<HTMLButtonElement>("play");
const stopButton = el<HTMLButtonElement>("stop");
const applyTempoButton = el<HTMLButtonElement>("apply-tempo");
const barCounter = el<HTMLSpanElement>("bar-counter");
const progressFill = el<HTMLDivElement>("bar-progress-fill");
const soundToggle = el<HTMLInputElement>("sound");
const chordName = el<HTMLDivElement>("chord-name");
const chordMeta = el<HTMLDivElement>("chord-meta");
const pcRow = el<HTMLDivElement>("pc-row");
const keyboardRoot = el<HTMLDivElement>("keyboard");
const logView = el<HTMLPreElement>("log");

let session: UiSession | null = null;
const sounder = new ChordSounder();

// pitch-class badges, lit per chord
const pcCells: HTMLSpanElement[] = PITCH_CLASS_NAMES.map((name) => {
  const cell = document.createElement("span");
  cell.className = "pc";
  cell.textContent = name;
  pcRow.appendChild(cell);
  return cell;
});

// keyboard layout: white keys on a grid, black keys straddling the gaps
const keyCells = new Map<number, HTMLDivElement>();
{
  const whiteWidth = 44;
  let whiteCount = 0;
  for (const key of keyboardKeys()) {
    const cell = document.createElement("div");
    cell.className = key.black ? "key black" : "key white";
    cell.textContent = key.black ? "" : key.label;
    if (key.black) {
      cell.style.left = `${whiteCount * whiteWidth - 13}px`;
    } else {
      cell.style.left = `${whiteCount * whiteWidth}px`;
      whiteCount += 1;
    }
    cell.dataset["midi"] = String(key.midi);
    keyboardRoot.appendChild(cell);
    keyCells.set(key.midi, cell);
  }
  keyboardRoot.style.width = `${whiteCount * whiteWidth + 2}px`;
}

function pressKey(midi: number): void {
  try {
    session?.noteOn(midi);
  } catch {
    // out-of-range pitches cannot come from the UI's own keys
  }
}

function releaseKey(midi: number): void {
  session?.noteOff(midi);
}

for (const [midi, cell] of keyCells) {
  cell.addEventListener("pointerdown", (event) => {
    event.preventDefault();
    pressKey(midi);
  });
  cell.addEventListener("pointerup", () => releaseKey(midi));
  cell.addEventListener("pointerleave", () => releaseKey(midi));
}

window.addEventListener("keydown", (event) => {
  if (event.repeat) return;
  if (event.target instanceof HTMLInputElement) return;
  if (event.target instanceof HTMLSelectElement) return;
  const midi = TYPING_MAP.get(event.key.toLowerCase());
  if (midi === undefined) return;
  event.preventDefault();
  pressKey(midi);
});

window.addEventListener("keyup", (event) => {
  const midi = TYPING_MAP.get(event.key.toLowerCase());
  if (midi === undefined) return;
  releaseKey(midi);
});

connectButton.addEventListener("click", () => {
  formError.textContent = "";
  session?.stop();
  let fresh: UiSession;
  try {
    fresh = connectAndConfigure(
      endpointInput.value.trim(),
      Number(alphaInput.value),
      vocabularySelect.value,
      Number(tempoInput.value),
    );
  } catch (err) {
    if (err instanceof InputValidationError) {
      formError.textContent = err.message;
      render();
      return;
    }
    throw err;
  }
  session = fresh;
  fresh.onchange = render;
  fresh.onchord = (chord) => {
    sounder.play(chord, barDurationMs(fresh.tempoBpm));
  };
  render();
});

playButton.addEventListener("click", () => {
  if (!session) return;
  try {
    playLoop(session);
  } catch (err) {
    formError.textContent = (err as Error).message;
  }
});

stopButton.addEventListener("click", () => session?.stop());

applyTempoButton.addEventListener("click", () => {
  if (!session) return;
  try {
    session.setTempo(Number(tempoInput.value));
    formError.textContent = "";
  } catch (err) {
    formError.textContent = (err as Error).message;
  }
});

soundToggle.addEventListener("change", () => {
  sounder.enabled = soundToggle.checked;
});

function render(): void {
  const state = session?.state ?? "idle";
  statusPill.textContent = state;
  statusPill.className = `pill ${state}`;
  connectButton.textContent =
    state === "error" || state === "stopped" ? "Reconnect" : "Connect";
  playButton.disabled = !(session && state === "open" && !session.playing);
  stopButton.disabled = !(session && state === "open");
  applyTempoButton.disabled = !(session && state === "open");
  barCounter.textContent = `bar ${session?.currentBar ?? 0}`;

  const chord = session?.lastChord ?? null;
  if (chord) {
    chordName.textContent = chordLabel(chord.root, chord.quality);
    chordMeta.textContent =
      `${chord.quality} (bar ${chord.bar_index})\n` +
      `${chord.source}, ${chord.latency_ms.toFixed(1)} ms`;
    const tones = new Set(chordTones(chord.root, chord.quality));
    pcCells.forEach((cell, pc) => {
      cell.className = "pc";
      if (tones.has(pc)) cell.classList.add("tone");
      if (pc === chord.root) cell.classList.add("root");
    });
    for (const [midi, cell] of keyCells) {
      cell.classList.toggle("tone", tones.has(midi % 12));
    }
  } else {
    chordName.textContent = "...";
    chordMeta.textContent = session ? "waiting for the first bar" : "not connected";
    pcCells.forEach((cell) => (cell.className = "pc"));
    for (const cell of keyCells.values()) cell.classList.remove("tone");
  }

  const held = session?.heldKeys;
  for (const [midi, cell] of keyCells) {
    cell.classList.toggle("held", held?.has(midi) ?? false);
  }

  const entries = session?.log ?? [];
  logView.textContent = entries
    .slice(-200)
    .map((entry) => {
      const stamp = (entry.atMs / 1000).toFixed(2).padStart(8);
      return `${stamp}  ${entry.kind.padEnd(8)}  ${entry.text}`;
    })
    .join("\n");
  logView.scrollTop = logView.scrollHeight;
}

// the beat indicator runs on the UI loop, decoupled from frame traffic
setInterval(() => {
  const progress = session?.barProgress() ?? 0;
  progressFill.style.width = `${(progress * 100).toFixed(1)}%`;
}, 60);

render();
