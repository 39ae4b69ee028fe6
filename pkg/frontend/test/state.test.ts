import { describe, expect, it } from "vitest";

import {
  applyScore,
  canScore,
  initialState,
  keyToAction,
  loopSeconds,
  step,
  tick,
  togglePlay,
  ViewerState,
} from "../src/state.js";

function playing(nTrials = 3, nFrames = 32, fps = 10): ViewerState {
  return togglePlay(initialState(nTrials, nFrames, fps));
}

describe("cine playback", () => {
  it("cycles frames 1..S with wrap-around", () => {
    let s = playing();
    const seen: number[] = [];
    for (let i = 0; i < 64; i++) {
      s = tick(s);
      seen.push(s.frame);
    }
    expect(seen.slice(0, 3)).toEqual([2, 3, 4]);
    expect(seen[30]).toBe(32);
    expect(seen[31]).toBe(1); // 32 wraps to 1
    expect(Math.min(...seen)).toBe(1);
    expect(Math.max(...seen)).toBe(32);
  });

  it("full loop takes nFrames/fps seconds", () => {
    expect(loopSeconds(initialState(1, 32, 10))).toBeCloseTo(3.2);
  });

  it("tick is a no-op while paused", () => {
    const s = initialState(1, 32, 10);
    expect(tick(s).frame).toBe(1);
  });

  it("pause then step advances exactly one frame", () => {
    let s = playing();
    s = tick(s);
    s = togglePlay(s); // pause at frame 2
    s = step(s, 1);
    expect(s.frame).toBe(3);
    expect(s.playing).toBe(false);
  });

  it("step wraps in both directions", () => {
    let s = initialState(1, 32, 10);
    s = step(s, -1);
    expect(s.frame).toBe(32);
    s = step(s, 1);
    expect(s.frame).toBe(1);
  });

  it("stepping during playback pauses it", () => {
    const s = step(playing(), 1);
    expect(s.playing).toBe(false);
  });
});

describe("scoring flow", () => {
  it("allows scoring only while the active trial is unscored", () => {
    let s = initialState(2, 32, 10);
    expect(canScore(s)).toBe(true);
    s = applyScore(s);
    expect(s.trial).toBe(2);
    expect(canScore(s)).toBe(true);
    s = applyScore(s);
    expect(s.finished).toBe(true);
    expect(canScore(s)).toBe(false);
    expect(() => applyScore(s)).toThrow();
  });

  it("advancing to the next trial resets frame and pauses", () => {
    let s = playing(2);
    s = tick(s);
    s = applyScore(s);
    expect(s.frame).toBe(1);
    expect(s.playing).toBe(false);
    expect(s.scoredCount).toBe(1);
  });

  it("empty session is finished immediately", () => {
    const s = initialState(0, 32, 10);
    expect(s.finished).toBe(true);
    expect(canScore(s)).toBe(false);
  });
});

describe("keyboard contract", () => {
  it("maps 0-3 to scores", () => {
    for (const k of ["0", "1", "2", "3"]) {
      expect(keyToAction(k)).toEqual({ kind: "score", value: Number(k) });
    }
  });

  it("maps space to play/pause and arrows to steps", () => {
    expect(keyToAction(" ")).toEqual({ kind: "toggle-play" });
    expect(keyToAction("ArrowRight")).toEqual({ kind: "step", delta: 1 });
    expect(keyToAction("ArrowLeft")).toEqual({ kind: "step", delta: -1 });
  });

  it("ignores everything else", () => {
    for (const k of ["4", "9", "a", "Enter", "Escape"]) {
      expect(keyToAction(k)).toEqual({ kind: "none" });
    }
  });
});
