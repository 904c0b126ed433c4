/**
 * The jam session state machine.
 *
 * One session owns one socket and the bar clock.  The engine is clock-free:
 * it learns bar boundaries only from the bar frames this module emits, so
 * the metronome here is the authoritative timebase of a jam.  Bar frames are
 * sent exactly once per metronome bar, and a tempo change waits for the next
 * boundary so the bar in progress keeps its length.
 *
 * All timing and transport dependencies are injected, defaulting to the
 * browser's WebSocket and timer APIs; tests drive the same code with a fake
 * clock and an in-memory engine.
 */
import {
  encodeClientFrame,
  parseEngineFrame,
  vocabularySchema,
  ProtocolError,
  type ChordFrame,
  type ClientFrame,
  type Vocabulary,
} from "./protocol";

export type ConnectionState = "connecting" | "open" | "error" | "stopped";

/** The slice of a WebSocket this module uses, shaped for injection. */
export interface SocketLike {
  send(data: string): void;
  close(): void;
  onopen: (() => void) | null;
  onmessage: ((event: { data: unknown }) => void) | null;
  onclose: (() => void) | null;
  onerror: (() => void) | null;
}

export interface SessionDeps {
  socketFactory: (endpoint: string) => SocketLike;
  now: () => number;
  schedule: (fn: () => void, delayMs: number) => unknown;
  cancel: (handle: unknown) => void;
}

export interface LogEntry {
  atMs: number;
  kind: "sent" | "received" | "status";
  text: string;
}

/** Bad user input, caught before anything touches the network. */
export class InputValidationError extends Error {}

export const BEATS_PER_BAR = 4;

export function barDurationMs(tempoBpm: number): number {
  return (BEATS_PER_BAR * 60_000) / tempoBpm;
}

function browserDeps(): SessionDeps {
  return {
    socketFactory: (endpoint) => {
      const ws = new WebSocket(endpoint);
      const shim: SocketLike = {
        send: (data) => ws.send(data),
        close: () => ws.close(),
        onopen: null,
        onmessage: null,
        onclose: null,
        onerror: null,
      };
      ws.onopen = () => shim.onopen?.();
      ws.onmessage = (event) => shim.onmessage?.({ data: event.data });
      ws.onclose = () => shim.onclose?.();
      ws.onerror = () => shim.onerror?.();
      return shim;
    },
    now: () => performance.now(),
    schedule: (fn, delayMs) => setTimeout(fn, delayMs),
    cancel: (handle) => clearTimeout(handle as ReturnType<typeof setTimeout>),
  };
}

export class UiSession {
  state: ConnectionState = "connecting";
  tempoBpm: number;
  /** Index of the bar currently sounding under the metronome. */
  currentBar = 0;
  lastChord: ChordFrame | null = null;
  readonly log: LogEntry[] = [];

  /** Fired after any observable change; the page re-renders from state. */
  onchange: (() => void) | null = null;
  /** Fired once per chord frame, for sounding the arrival. */
  onchord: ((chord: ChordFrame) => void) | null = null;

  private readonly deps: SessionDeps;
  private readonly socket: SocketLike;
  private readonly startMs: number;
  private readonly alpha: number;
  private readonly vocabulary: Vocabulary;
  private readonly held = new Set<number>();
  private playingNow = false;
  private nextBarIndex = 0;
  private boundaryAtMs = 0;
  private barMs = 0;
  private timer: unknown = null;

  constructor(
    endpoint: string,
    alpha: number,
    vocabulary: Vocabulary,
    tempoBpm: number,
    deps: SessionDeps,
  ) {
    this.alpha = alpha;
    this.vocabulary = vocabulary;
    this.tempoBpm = tempoBpm;
    this.deps = deps;
    this.startMs = deps.now();
    this.socket = deps.socketFactory(endpoint);
    this.socket.onopen = () => this.handleOpen();
    this.socket.onmessage = (event) => this.handleMessage(event.data);
    this.socket.onclose = () => this.handleClose();
    this.socket.onerror = () => this.handleError();
  }

  get playing(): boolean {
    return this.playingNow;
  }

  get heldKeys(): ReadonlySet<number> {
    return this.held;
  }

  /** Fraction of the current bar elapsed, 0 when the metronome is idle. */
  barProgress(): number {
    if (!this.playingNow || this.barMs <= 0) return 0;
    const fraction = 1 - (this.boundaryAtMs - this.deps.now()) / this.barMs;
    return Math.min(1, Math.max(0, fraction));
  }

  /** Start the metronome; each boundary closes one bar on the wire. */
  play(): void {
    if (this.state !== "open") {
      throw new InputValidationError(
        "cannot start the metronome before the session is connected",
      );
    }
    if (this.playingNow) return;
    this.playingNow = true;
    this.barMs = barDurationMs(this.tempoBpm);
    this.boundaryAtMs = this.deps.now() + this.barMs;
    this.timer = this.deps.schedule(() => this.barTick(), this.barMs);
    this.note("status", `metronome started at ${this.tempoBpm} bpm`);
    this.notifyChange();
  }

  /**
   * Change the tempo.  The bar in progress keeps its scheduled length; the
   * new duration applies from the next boundary.
   */
  setTempo(tempoBpm: number): void {
    if (!Number.isFinite(tempoBpm) || tempoBpm <= 0) {
      throw new InputValidationError("tempo must be a positive bpm value");
    }
    this.tempoBpm = tempoBpm;
    this.note("status", `tempo set to ${tempoBpm} bpm`);
    this.notifyChange();
  }

  noteOn(pitch: number, velocity = 96): void {
    if (!Number.isInteger(pitch) || pitch < 0 || pitch > 127) {
      throw new InputValidationError(`pitch out of MIDI range: ${pitch}`);
    }
    if (this.state !== "open") return;
    if (this.held.has(pitch)) return; // key autorepeat
    this.held.add(pitch);
    this.sendFrame({ type: "note_on", pitch, velocity, time_ms: this.elapsed() });
    this.notifyChange();
  }

  noteOff(pitch: number): void {
    if (this.state !== "open") return;
    if (!this.held.delete(pitch)) return;
    this.sendFrame({ type: "note_off", pitch, time_ms: this.elapsed() });
    this.notifyChange();
  }

  /** Stop the metronome and close the socket; the log survives. */
  stop(): void {
    if (this.state === "stopped") return;
    this.shutdown("stopped");
  }

  private elapsed(): number {
    return Math.max(0, Math.round(this.deps.now() - this.startMs));
  }

  private note(kind: LogEntry["kind"], text: string): void {
    this.log.push({ atMs: this.elapsed(), kind, text });
  }

  private notifyChange(): void {
    this.onchange?.();
  }

  private sendFrame(frame: ClientFrame): void {
    const text = encodeClientFrame(frame); // validates; nothing malformed leaves
    this.socket.send(text);
    this.note("sent", text);
  }

  private handleOpen(): void {
    if (this.state !== "connecting") return;
    this.state = "open";
    this.note("status", "connected");
    this.sendFrame({
      type: "config",
      alpha: this.alpha,
      vocabulary: this.vocabulary,
      tempo_bpm: this.tempoBpm,
    });
    this.notifyChange();
  }

  private handleMessage(data: unknown): void {
    if (this.state !== "open") return;
    let frame;
    try {
      if (typeof data !== "string") {
        throw new ProtocolError("engine sent a non-text frame");
      }
      frame = parseEngineFrame(data);
    } catch (err) {
      this.shutdown(`protocol failure: ${(err as Error).message}`);
      return;
    }
    if (frame.type === "error") {
      this.shutdown(`engine error: ${frame.message}`);
      return;
    }
    this.lastChord = frame;
    this.note("received", data as string);
    this.onchord?.(frame);
    this.notifyChange();
  }

  private handleClose(): void {
    if (this.state === "connecting") {
      this.state = "error";
      this.note("status", "connection failed");
      this.notifyChange();
    } else if (this.state === "open") {
      this.stopMetronome();
      this.state = "stopped";
      this.note("status", "connection closed by engine");
      this.notifyChange();
    }
  }

  private handleError(): void {
    if (this.state === "open" || this.state === "connecting") {
      this.note("status", "socket error");
    }
  }

  private barTick(): void {
    if (!this.playingNow || this.state !== "open") return;
    this.sendFrame({ type: "bar", index: this.nextBarIndex });
    this.nextBarIndex += 1;
    this.currentBar = this.nextBarIndex;
    // re-read the tempo here so a change lands on the boundary, never mid-bar
    this.barMs = barDurationMs(this.tempoBpm);
    this.boundaryAtMs += this.barMs;
    const delay = Math.max(0, this.boundaryAtMs - this.deps.now());
    this.timer = this.deps.schedule(() => this.barTick(), delay);
    this.notifyChange();
  }

  private stopMetronome(): void {
    if (this.timer !== null) {
      this.deps.cancel(this.timer);
      this.timer = null;
    }
    this.playingNow = false;
  }

  private shutdown(reason: string): void {
    this.stopMetronome();
    const wasLive = this.state === "open" || this.state === "connecting";
    // flip state first: closing may fire onclose synchronously
    this.state = "stopped";
    this.note("status", reason);
    if (wasLive) this.socket.close();
    this.notifyChange();
  }
}

/**
 * Validate the connection form and open a session.
 *
 * Validation happens before the socket factory is called, so bad input
 * never produces network traffic.  The returned session starts in the
 * "connecting" state; the config frame goes out when the socket opens.
 */
export function connectAndConfigure(
  endpoint: string,
  alpha: number,
  vocabulary: string,
  tempoBpm: number,
  deps?: Partial<SessionDeps>,
): UiSession {
  if (!/^wss?:\/\/\S+$/.test(endpoint)) {
    throw new InputValidationError("endpoint must be a ws:// or wss:// URL");
  }
  if (typeof alpha !== "number" || !Number.isFinite(alpha) || alpha < 0 || alpha > 1) {
    throw new InputValidationError("alpha must be a number between 0 and 1");
  }
  const vocab = vocabularySchema.safeParse(vocabulary);
  if (!vocab.success) {
    throw new InputValidationError('vocabulary must be "diatonic7" or "full60"');
  }
  if (!Number.isFinite(tempoBpm) || tempoBpm <= 0) {
    throw new InputValidationError("tempo must be a positive bpm value");
  }
  const resolved: SessionDeps = { ...browserDeps(), ...deps };
  return new UiSession(endpoint, alpha, vocab.data, tempoBpm, resolved);
}

/** Arm the metronome on a configured session. */
export function playLoop(session: UiSession): void {
  session.play();
}
