/**
 * Typed client for the study-service HTTP API.
 *
 * Everything the client sees is blinded by construction: sessions carry
 * opaque trial tokens and counts, frames are plain PNGs, and results only
 * become available once every trial is scored.
 */

export interface StudyPlan {
  conditions: [number, string][];
  stacks_per_condition: number;
  seed: number;
  frame_rate: number;
}

export interface SessionState {
  session_id: string;
  n_trials: number;
  n_frames: number;
  frame_rate: number;
  trials: string[]; // opaque tokens
  scored: number[];
  complete: boolean;
}

export interface ScoreAck {
  scored: number;
  n_trials: number;
  complete: boolean;
}

export interface LevelResult {
  level: number;
  auc: number;
  dprime: number | null;
  n_lesion: number;
  n_healthy: number;
  histograms: Record<string, number[]>;
}

export interface StudyResults {
  levels: LevelResult[];
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(`HTTP ${status}: ${detail}`);
  }
}

async function checked<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      detail = ((await resp.json()) as { detail?: string }).detail ?? detail;
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class StudyClient {
  constructor(private base: string = "") {}

  async createSession(plan: StudyPlan): Promise<SessionState> {
    const resp = await fetch(`${this.base}/api/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(plan),
    });
    return checked<SessionState>(resp);
  }

  async getSession(sessionId: string): Promise<SessionState> {
    return checked<SessionState>(
      await fetch(`${this.base}/api/sessions/${sessionId}`),
    );
  }

  frameUrl(sessionId: string, trial: number, frame: number): string {
    return `${this.base}/api/sessions/${sessionId}/trials/${trial}/frames/${frame}`;
  }

  async fetchFrame(
    sessionId: string,
    trial: number,
    frame: number,
  ): Promise<Blob> {
    const resp = await fetch(this.frameUrl(sessionId, trial, frame));
    if (!resp.ok) throw new ApiError(resp.status, "frame fetch failed");
    return resp.blob();
  }

  async submitScore(
    sessionId: string,
    trial: number,
    score: number,
    responseTimeMs: number,
  ): Promise<ScoreAck> {
    const resp = await fetch(
      `${this.base}/api/sessions/${sessionId}/trials/${trial}/score`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ score, response_time_ms: responseTimeMs }),
      },
    );
    return checked<ScoreAck>(resp);
  }

  async getResults(sessionId: string): Promise<StudyResults> {
    return checked<StudyResults>(
      await fetch(`${this.base}/api/sessions/${sessionId}/results`),
    );
  }
}
