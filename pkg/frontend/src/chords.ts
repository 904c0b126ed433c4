/** Chord spelling helpers for the display: labels and triad tones. */
import type { Quality } from "./protocol";

export const PITCH_CLASS_NAMES = [
  "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
] as const;

// root, third (fourth for suspended), fifth; semitone offsets
export const QUALITY_INTERVALS: Record<Quality, readonly [number, number, number]> = {
  major: [0, 4, 7],
  minor: [0, 3, 7],
  augmented: [0, 4, 8],
  diminished: [0, 3, 6],
  suspended: [0, 5, 7],
};

const QUALITY_SUFFIX: Record<Quality, string> = {
  major: "",
  minor: "m",
  augmented: "aug",
  diminished: "dim",
  suspended: "sus",
};

export function pitchClassName(pc: number): string {
  const name = PITCH_CLASS_NAMES[((pc % 12) + 12) % 12];
  if (name === undefined) {
    throw new RangeError(`not a pitch class: ${pc}`);
  }
  return name;
}

/** Compact display name, e.g. (9, "minor") -> "Am". */
export function chordLabel(root: number, quality: Quality): string {
  return `${pitchClassName(root)}${QUALITY_SUFFIX[quality]}`;
}

/** Pitch classes sounding in the triad, root first. */
export function chordTones(root: number, quality: Quality): number[] {
  const base = ((root % 12) + 12) % 12;
  return QUALITY_INTERVALS[quality].map((step) => (base + step) % 12);
}
