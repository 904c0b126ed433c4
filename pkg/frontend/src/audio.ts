/** Optional chord sound: three plain oscillators per arrival. Browser only. */
import { QUALITY_INTERVALS } from "./chords";
import type { ChordFrame } from "./protocol";

export class ChordSounder {
  enabled = false;
  private ctx: AudioContext | null = null;

  play(chord: ChordFrame, durationMs: number): void {
    if (!this.enabled || typeof AudioContext === "undefined") return;
    this.ctx ??= new AudioContext();
    const ctx = this.ctx;
    if (ctx.state === "suspended") void ctx.resume();
    const start = ctx.currentTime;
    const stop = start + Math.min(durationMs, 4000) / 1000;
    for (const step of QUALITY_INTERVALS[chord.quality]) {
      const midi = 48 + chord.root + step; // triad rooted near C3
      const osc = ctx.createOscillator();
      const gain = ctx.createGain();
      osc.type = "triangle";
      osc.frequency.value = 440 * 2 ** ((midi - 69) / 12);
      gain.gain.setValueAtTime(0, start);
      gain.gain.linearRampToValueAtTime(0.12, start + 0.02);
      gain.gain.setTargetAtTime(0, Math.max(start, stop - 0.25), 0.08);
      osc.connect(gain).connect(ctx.destination);
      osc.start(start);
      osc.stop(stop);
    }
  }
}
