/**
 * The virtual keyboard model: two octaves, C4 to B5.
 *
 * The engine folds pitches to pitch classes, so two octaves are enough to
 * voice any melody material the predictor can distinguish.
 */
import { pitchClassName } from "./chords";

export const LOWEST_KEY = 60; // C4
export const HIGHEST_KEY = 83; // B5

export interface KeyInfo {
  midi: number;
  pitchClass: number;
  octave: number;
  label: string;
  black: boolean;
}

const BLACK_PCS = new Set([1, 3, 6, 8, 10]);

export function keyboardKeys(): KeyInfo[] {
  const keys: KeyInfo[] = [];
  for (let midi = LOWEST_KEY; midi <= HIGHEST_KEY; midi += 1) {
    const pitchClass = midi % 12;
    const octave = Math.floor(midi / 12) - 1;
    keys.push({
      midi,
      pitchClass,
      octave,
      label: `${pitchClassName(pitchClass)}${octave}`,
      black: BLACK_PCS.has(pitchClass),
    });
  }
  return keys;
}

/** Computer-keyboard mapping: zsxd... lower octave, q2w3... upper octave. */
export const TYPING_MAP: ReadonlyMap<string, number> = new Map([
  ["z", 60], ["s", 61], ["x", 62], ["d", 63], ["c", 64], ["v", 65],
  ["g", 66], ["b", 67], ["h", 68], ["n", 69], ["j", 70], ["m", 71],
  ["q", 72], ["2", 73], ["w", 74], ["3", 75], ["e", 76], ["r", 77],
  ["5", 78], ["t", 79], ["6", 80], ["y", 81], ["7", 82], ["u", 83],
]);
