/**
 * DOM wiring for the cine viewer: canvas rendering with nearest-neighbor
 * upscaling, full-stack prefetch per trial, a playback timer, and the
 * keyboard contract from state.ts. The UI shows only trial progress and
 * frames; labels, levels, and stack identities never reach the client.
 */

import { StudyClient } from "./api.js";
import {
  Action,
  applyScore,
  canScore,
  initialState,
  keyToAction,
  step,
  tick,
  togglePlay,
  ViewerState,
} from "./state.js";

const SCALE = 8;

export class Viewer {
  private state: ViewerState;
  private frames: ImageBitmap[] = [];
  private trialShownAt = 0;
  private busy = false;

  constructor(
    private client: StudyClient,
    private sessionId: string,
    nTrials: number,
    private nFrames: number,
    fps: number,
    private canvas: HTMLCanvasElement,
    private status: HTMLElement,
  ) {
    this.state = initialState(nTrials, nFrames, fps);
  }

  async start(): Promise<void> {
    document.addEventListener("keydown", (ev) => {
      void this.dispatch(keyToAction(ev.key));
    });
    await this.loadTrial();
    setInterval(() => {
      this.state = tick(this.state);
      this.render();
    }, 1000 / this.state.fps);
  }

  /** Single entry point for every user-driven transition. */
  async dispatch(action: Action): Promise<void> {
    if (this.busy || this.state.finished) return;
    switch (action.kind) {
      case "toggle-play":
        this.state = togglePlay(this.state);
        break;
      case "step":
        this.state = step(this.state, action.delta);
        break;
      case "score":
        await this.submit(action.value);
        break;
      case "none":
        return;
    }
    this.render();
  }

  private async submit(score: number): Promise<void> {
    if (!canScore(this.state)) return;
    this.busy = true;
    try {
      const elapsed = performance.now() - this.trialShownAt;
      await this.client.submitScore(
        this.sessionId,
        this.state.trial,
        score,
        Math.round(elapsed),
      );
      this.state = applyScore(this.state);
      if (!this.state.finished) await this.loadTrial();
    } finally {
      this.busy = false;
    }
  }

  /** Prefetch every frame of the active trial before showing it. */
  private async loadTrial(): Promise<void> {
    this.frames = await Promise.all(
      Array.from({ length: this.nFrames }, (_, i) =>
        this.client
          .fetchFrame(this.sessionId, this.state.trial, i + 1)
          .then((blob) => createImageBitmap(blob)),
      ),
    );
    this.trialShownAt = performance.now();
    this.render();
  }

  private render(): void {
    const ctx = this.canvas.getContext("2d");
    const bitmap = this.frames[this.state.frame - 1];
    if (ctx && bitmap) {
      this.canvas.width = bitmap.width * SCALE;
      this.canvas.height = bitmap.height * SCALE;
      ctx.imageSmoothingEnabled = false; // nearest-neighbor upscale
      ctx.drawImage(bitmap, 0, 0, this.canvas.width, this.canvas.height);
    }
    this.status.textContent = this.state.finished
      ? `done — ${this.state.scoredCount}/${this.state.nTrials} scored`
      : `trial ${this.state.trial}/${this.state.nTrials} · ` +
        `frame ${this.state.frame}/${this.state.nFrames} · ` +
        (this.state.playing ? "playing" : "paused") +
        " · keys: 0-3 score, space play/pause, arrows step";
  }
}
