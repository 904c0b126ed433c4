/**
 * Wire schemas for the engine's newline-delimited JSON session protocol.
 *
 * The same JSON payloads travel over standard streams and over the socket
 * endpoint, one object per text frame.  Field names are fixed; every schema
 * here is strict, so a frame with an unknown key is rejected rather than
 * silently trimmed.  The client funnels all traffic through
 * {@link encodeClientFrame} and {@link parseEngineFrame}, which means a frame
 * that does not validate never reaches the wire in either direction.
 */
import { z } from "zod";

export const vocabularySchema = z.enum(["diatonic7", "full60"]);
export type Vocabulary = z.infer<typeof vocabularySchema>;

export const qualitySchema = z.enum([
  "major",
  "minor",
  "augmented",
  "diminished",
  "suspended",
]);
export type Quality = z.infer<typeof qualitySchema>;

// MIDI data bytes; zod numbers already exclude NaN and infinities.
const midiByte = z.number().int().min(0).max(127);
const nonNegativeMs = z.number().min(0);

/** Session setup; must precede the first bar message. */
export const configFrameSchema = z.strictObject({
  type: z.literal("config"),
  alpha: z.number().min(0).max(1),
  vocabulary: vocabularySchema,
  tempo_bpm: z.number().positive(),
});
export type ConfigFrame = z.infer<typeof configFrameSchema>;

export const noteOnFrameSchema = z.strictObject({
  type: z.literal("note_on"),
  pitch: midiByte,
  velocity: midiByte,
  time_ms: nonNegativeMs,
});

export const noteOffFrameSchema = z.strictObject({
  type: z.literal("note_off"),
  pitch: midiByte,
  time_ms: nonNegativeMs,
});

/** Closes the bar named by `index`; the engine answers with one chord. */
export const barFrameSchema = z.strictObject({
  type: z.literal("bar"),
  index: z.number().int().min(0),
});

export const clientFrameSchema = z.discriminatedUnion("type", [
  configFrameSchema,
  noteOnFrameSchema,
  noteOffFrameSchema,
  barFrameSchema,
]);
export type ClientFrame = z.infer<typeof clientFrameSchema>;

/** The engine's answer for one completed bar. */
export const chordFrameSchema = z.strictObject({
  type: z.literal("chord"),
  bar_index: z.number().int().min(0),
  root: z.number().int().min(0).max(11),
  quality: qualitySchema,
  source: z.enum(["vom", "fallback"]),
  latency_ms: nonNegativeMs,
});
export type ChordFrame = z.infer<typeof chordFrameSchema>;

export const errorFrameSchema = z.strictObject({
  type: z.literal("error"),
  message: z.string().min(1),
});

export const engineFrameSchema = z.discriminatedUnion("type", [
  chordFrameSchema,
  errorFrameSchema,
]);
export type EngineFrame = z.infer<typeof engineFrameSchema>;

/** A frame failed validation, in either direction. */
export class ProtocolError extends Error {}

function issueSummary(error: z.ZodError): string {
  return error.issues
    .map((issue) =>
      issue.path.length
        ? `${issue.path.map(String).join(".")}: ${issue.message}`
        : issue.message,
    )
    .join("; ");
}

/** Serialize one client frame, refusing anything the schema rejects. */
export function encodeClientFrame(frame: ClientFrame): string {
  const checked = clientFrameSchema.safeParse(frame);
  if (!checked.success) {
    throw new ProtocolError(
      `refusing to send a malformed frame: ${issueSummary(checked.error)}`,
    );
  }
  return JSON.stringify(checked.data);
}

/** Parse one text frame received from the engine. */
export function parseEngineFrame(text: string): EngineFrame {
  let raw: unknown;
  try {
    raw = JSON.parse(text);
  } catch {
    throw new ProtocolError(`engine sent invalid JSON: ${text.slice(0, 120)}`);
  }
  const checked = engineFrameSchema.safeParse(raw);
  if (!checked.success) {
    throw new ProtocolError(
      `engine frame does not match the protocol: ${issueSummary(checked.error)}`,
    );
  }
  return checked.data;
}
