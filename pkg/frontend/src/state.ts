/**
 * Pure viewer state machine: one active trial at a time, cine playback
 * cycling frames 1..S, scoring allowed only while the active trial is
 * unscored. All transitions are synchronous functions so playback timers
 * and network callbacks funnel through a single logical event queue.
 */

export interface ViewerState {
  trial: number; // 1-based; 0 = no active trial
  nTrials: number;
  nFrames: number;
  frame: number; // 1-based
  fps: number;
  playing: boolean;
  scoredCount: number;
  trialScored: boolean;
  finished: boolean;
}

export function initialState(
  nTrials: number,
  nFrames: number,
  fps: number,
): ViewerState {
  return {
    trial: nTrials > 0 ? 1 : 0,
    nTrials,
    nFrames,
    frame: 1,
    fps,
    playing: false,
    scoredCount: 0,
    trialScored: false,
    finished: nTrials === 0,
  };
}

/** Seconds for one full cine loop at the configured rate. */
export function loopSeconds(state: ViewerState): number {
  return state.nFrames / state.fps;
}

/** Timer tick while playing: advance one frame, wrapping S -> 1. */
export function tick(state: ViewerState): ViewerState {
  if (!state.playing) return state;
  return { ...state, frame: (state.frame % state.nFrames) + 1 };
}

/** Manual step (arrow keys); always pauses playback first. */
export function step(state: ViewerState, delta: 1 | -1): ViewerState {
  const frame =
    ((state.frame - 1 + delta + state.nFrames) % state.nFrames) + 1;
  return { ...state, playing: false, frame };
}

export function togglePlay(state: ViewerState): ViewerState {
  if (state.finished) return state;
  return { ...state, playing: !state.playing };
}

export function canScore(state: ViewerState): boolean {
  return state.trial > 0 && !state.trialScored && !state.finished;
}

/** Record a submitted score and move to the next trial (or finish). */
export function applyScore(state: ViewerState): ViewerState {
  if (!canScore(state)) {
    throw new Error("score submission not allowed in this state");
  }
  const scoredCount = state.scoredCount + 1;
  if (state.trial >= state.nTrials) {
    return {
      ...state,
      scoredCount,
      trialScored: true,
      playing: false,
      finished: true,
    };
  }
  return {
    ...state,
    scoredCount,
    trial: state.trial + 1,
    frame: 1,
    playing: false,
    trialScored: false,
  };
}

export type Action =
  | { kind: "score"; value: 0 | 1 | 2 | 3 }
  | { kind: "toggle-play" }
  | { kind: "step"; delta: 1 | -1 }
  | { kind: "none" };

/** Keyboard contract: 0-3 score, space play/pause, arrows step. */
export function keyToAction(key: string): Action {
  if (key === " " || key === "Space") return { kind: "toggle-play" };
  if (key === "ArrowRight") return { kind: "step", delta: 1 };
  if (key === "ArrowLeft") return { kind: "step", delta: -1 };
  if (/^[0-3]$/.test(key)) {
    return { kind: "score", value: Number(key) as 0 | 1 | 2 | 3 };
  }
  return { kind: "none" };
}
