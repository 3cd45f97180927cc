/** Abstract event playback: a time cursor sweeping the brush window's right
 * edge at 1x to 32x. Views render the window [brush.from, cursor]. */

export const PLAYBACK_SPEEDS = [1, 2, 4, 8, 16, 32] as const;

export class Playback {
  cursorMs: number;
  playing = false;
  private speedIndex = 0;

  constructor(private fromMs: number, private toMs: number) {
    this.cursorMs = fromMs;
  }

  get speed(): number {
    return PLAYBACK_SPEEDS[this.speedIndex];
  }

  cycleSpeed(): number {
    this.speedIndex = (this.speedIndex + 1) % PLAYBACK_SPEEDS.length;
    return this.speed;
  }

  setWindow(fromMs: number, toMs: number): void {
    this.fromMs = fromMs;
    this.toMs = toMs;
    this.cursorMs = Math.min(Math.max(this.cursorMs, fromMs), toMs);
  }

  start(): void {
    this.playing = true;
    if (this.cursorMs >= this.toMs) this.cursorMs = this.fromMs;
  }

  pause(): void {
    this.playing = false;
  }

  /** Advance by `elapsedMs` of wall time; returns the new cursor. */
  tick(elapsedMs: number): number {
    if (this.playing) {
      this.cursorMs = Math.min(this.cursorMs + elapsedMs * this.speed, this.toMs);
      if (this.cursorMs >= this.toMs) this.playing = false;
    }
    return this.cursorMs;
  }

  /** Window to render while playing back. */
  window(): { fromMs: number; toMs: number } {
    return { fromMs: this.fromMs, toMs: this.cursorMs };
  }
}
