/**
 * Test doubles: a deterministic clock, an in-memory socket, and a mock
 * engine that mirrors the live service's protocol behaviour (config gate,
 * strictly increasing bar indices, one chord per bar, error frames).
 *
 * The mock validates every frame the client sends against the wire schema
 * and records violations instead of throwing, so a conformance test can
 * drive a whole jam and assert the violation list is empty at the end.
 */
import { clientFrameSchema, type ChordFrame, type Quality } from "../src/protocol";
import type { SessionDeps, SocketLike } from "../src/session";

interface FakeTimer {
  id: number;
  at: number;
  fn: () => void;
}

export class FakeClock {
  private t = 0;
  private seq = 1;
  private timers: FakeTimer[] = [];

  readonly deps: Pick<SessionDeps, "now" | "schedule" | "cancel"> = {
    now: () => this.t,
    schedule: (fn, delayMs) => {
      const timer = { id: this.seq++, at: this.t + Math.max(0, delayMs), fn };
      this.timers.push(timer);
      return timer.id;
    },
    cancel: (handle) => {
      this.timers = this.timers.filter((timer) => timer.id !== handle);
    },
  };

  now(): number {
    return this.t;
  }

  /** Run every timer due within the next `ms`, in firing order. */
  advance(ms: number): void {
    const target = this.t + ms;
    for (;;) {
      const due = this.timers
        .filter((timer) => timer.at <= target)
        .sort((a, b) => a.at - b.at || a.id - b.id)[0];
      if (!due) break;
      this.timers = this.timers.filter((timer) => timer.id !== due.id);
      this.t = Math.max(this.t, due.at);
      due.fn();
    }
    this.t = target;
  }
}

export class FakeSocket implements SocketLike {
  onopen: (() => void) | null = null;
  onmessage: ((event: { data: unknown }) => void) | null = null;
  onclose: (() => void) | null = null;
  onerror: (() => void) | null = null;
  readonly sent: string[] = [];
  closedByClient = false;

  constructor(private readonly onSend?: (text: string) => void) {}

  send(data: string): void {
    if (this.closedByClient) throw new Error("send on a closed socket");
    this.sent.push(data);
    this.onSend?.(data);
  }

  close(): void {
    if (this.closedByClient) return;
    this.closedByClient = true;
    this.onclose?.(); // synchronous close stresses reentrancy in handlers
  }

  open(): void {
    this.onopen?.();
  }

  failToConnect(): void {
    this.onerror?.();
    this.onclose?.();
  }

  dropConnection(): void {
    this.onclose?.();
  }

  deliver(text: string): void {
    this.onmessage?.({ data: text });
  }
}

const PROGRESSION: ReadonlyArray<{ root: number; quality: Quality }> = [
  { root: 0, quality: "major" }, // C
  { root: 9, quality: "minor" }, // Am
  { root: 5, quality: "major" }, // F
  { root: 7, quality: "major" }, // G
];

export class MockEngine {
  readonly socket: FakeSocket;
  readonly received: unknown[] = [];
  readonly violations: string[] = [];
  readonly barsSeen: number[] = [];
  configured = false;
  private notesInBar = 0;

  constructor() {
    this.socket = new FakeSocket((text) => this.handle(text));
  }

  barFrames(): number[] {
    return this.barsSeen.slice();
  }

  noteFrames(): Array<{ type: string; time_ms: number }> {
    return this.received.filter(
      (frame): frame is { type: string; time_ms: number } =>
        typeof frame === "object" &&
        frame !== null &&
        "type" in frame &&
        ((frame as { type: unknown }).type === "note_on" ||
          (frame as { type: unknown }).type === "note_off"),
    );
  }

  injectError(message: string): void {
    this.reply({ type: "error", message });
    this.socket.dropConnection();
  }

  reply(frame: ChordFrame | { type: "error"; message: string }): void {
    this.socket.deliver(JSON.stringify(frame));
  }

  private handle(text: string): void {
    let raw: unknown;
    try {
      raw = JSON.parse(text);
    } catch {
      this.violations.push(`frame is not JSON: ${text}`);
      return;
    }
    this.received.push(raw);
    const checked = clientFrameSchema.safeParse(raw);
    if (!checked.success) {
      const detail = checked.error.issues
        .map((issue) => `${issue.path.map(String).join(".")}: ${issue.message}`)
        .join("; ");
      this.violations.push(`${text} :: ${detail}`);
      return;
    }
    const frame = checked.data;
    switch (frame.type) {
      case "config":
        this.configured = true;
        break;
      case "note_on":
        this.notesInBar += 1;
        break;
      case "note_off":
        break;
      case "bar": {
        if (!this.configured) {
          this.injectError("config required before the first bar");
          return;
        }
        const last = this.barsSeen[this.barsSeen.length - 1];
        if (last !== undefined && frame.index <= last) {
          this.injectError(`bar index must increase: got ${frame.index} after ${last}`);
          return;
        }
        this.barsSeen.push(frame.index);
        const pick = PROGRESSION[frame.index % PROGRESSION.length];
        if (!pick) throw new Error("unreachable");
        const source =
          this.notesInBar > 0 && this.barsSeen.length > 2 ? "vom" : "fallback";
        this.notesInBar = 0;
        this.reply({
          type: "chord",
          bar_index: frame.index,
          root: pick.root,
          quality: pick.quality,
          source,
          latency_ms: 0.37,
        });
        break;
      }
    }
  }
}

export interface Harness {
  clock: FakeClock;
  engine: MockEngine;
  deps: SessionDeps;
  factoryCalls: () => number;
}

export function harness(): Harness {
  const clock = new FakeClock();
  const engine = new MockEngine();
  let calls = 0;
  const deps: SessionDeps = {
    socketFactory: () => {
      calls += 1;
      return engine.socket;
    },
    ...clock.deps,
  };
  return { clock, engine, deps, factoryCalls: () => calls };
}
