"""HTTP study service: hosts blinded reader sessions over a generated
dataset.

A session is created from a StudyPlan (condition cells, stacks per
condition, order seed, frame rate). The trial sequence is a seeded
permutation; clients only ever see opaque keyed-hash trial tokens, frame
PNGs, and their own scores until the session is complete. Each session
persists as a private session.json (the assignment) plus an append-only
log.jsonl of TrialRecords; replaying the log reproduces the results
exactly.
"""

import io
import json
import os
import threading
import uuid
from hashlib import blake2b

import numpy as np
from fastapi import FastAPI, HTTPException
from fastapi.responses import Response
from PIL import Image
from pydantic import BaseModel, Field

from . import roc
from .rng import derive_rng
from .stacks import HEALTHY, LESION, load_manifest, load_stack

N_SCORE_LEVELS = 4  # scores 0..3
DEFAULT_STACKS_PER_CONDITION = 35
DEFAULT_FRAME_RATE = 10.0


class StudyPlan(BaseModel):
    conditions: list = Field(..., min_length=1,
                             description="list of [complexity_level, label] cells")
    stacks_per_condition: int = DEFAULT_STACKS_PER_CONDITION
    seed: int = 0
    frame_rate: float = DEFAULT_FRAME_RATE


class ScoreSubmission(BaseModel):
    score: int
    response_time_ms: float = 0.0


def _load_trial_stack(dataset_dir: str, stack_id: int):
    """Stack plus its stored display normalization (lo, hi)."""
    sidecar = os.path.join(dataset_dir, f"stack_{stack_id:06d}.json")
    with open(sidecar) as f:
        meta = json.load(f)
    norm = meta["normalization"]
    return load_stack(sidecar), (norm["lo"], norm["hi"])


def _trial_token(key: bytes, index: int) -> str:
    return blake2b(str(index).encode(), key=key, digest_size=8).hexdigest()


class Session:
    """In-memory handle over the persisted session state."""

    def __init__(self, data: dict, directory: str):
        self.data = data
        self.directory = directory
        self.lock = threading.Lock()
        self.scores = {}  # trial index -> record
        log = self.log_path
        if os.path.exists(log):
            with open(log) as f:
                for line in f:
                    rec = json.loads(line)
                    self.scores[rec["trial"]] = rec

    @property
    def log_path(self) -> str:
        return os.path.join(self.directory, "log.jsonl")

    @property
    def n_trials(self) -> int:
        return len(self.data["trials"])

    @property
    def complete(self) -> bool:
        return len(self.scores) == self.n_trials

    def trial(self, k: int) -> dict:
        if not 1 <= k <= self.n_trials:
            raise HTTPException(status_code=404, detail="unknown trial")
        return self.data["trials"][k - 1]


def _build_session(plan: StudyPlan, manifest: dict, sessions_dir: str) -> Session:
    by_cell = {}
    for entry in manifest["stacks"]:
        by_cell.setdefault((entry["complexity_level"], entry["label"]), []).append(entry)
    rng = derive_rng(plan.seed, "study")
    selected = []
    for cell in plan.conditions:
        level, label = int(cell[0]), str(cell[1])
        pool = by_cell.get((level, label), [])
        if len(pool) < plan.stacks_per_condition:
            raise HTTPException(
                status_code=409,
                detail=f"insufficient stacks for condition ({level}, {label}): "
                       f"{len(pool)} < {plan.stacks_per_condition}")
        picks = rng.choice(len(pool), size=plan.stacks_per_condition, replace=False)
        selected.extend(pool[int(i)] for i in picks)
    order = rng.permutation(len(selected))
    session_id = uuid.uuid4().hex
    token_key = os.urandom(16)
    trials = []
    for k, idx in enumerate(order, start=1):
        entry = selected[int(idx)]
        trials.append({
            "token": _trial_token(token_key, k),
            "stack_id": entry["stack_id"],
            "label": entry["label"],
            "level": entry["complexity_level"],
        })
    directory = os.path.join(sessions_dir, session_id)
    os.makedirs(directory)
    data = {
        "session_id": session_id,
        "plan": plan.model_dump(),
        "token_key": token_key.hex(),
        "trials": trials,
        "n_frames": None,  # filled by caller (needs stack dims)
        "dataset_dir": manifest["_dir"],
    }
    with open(os.path.join(directory, "session.json"), "w") as f:
        json.dump(data, f, indent=1, sort_keys=True)
    return Session(data, directory)


def compute_results(records: list, trials: list) -> dict:
    """Per-level ROC plus 4-bin score histograms from scored trial records.

    `records` carry trial index + score; `trials` carry the private
    label/level assignment.
    """
    by_trial = {rec["trial"]: rec["score"] for rec in records}
    levels = sorted({t["level"] for t in trials})
    out = {"levels": []}
    for level in levels:
        pos, neg = [], []
        hist = {}
        for k, t in enumerate(trials, start=1):
            if t["level"] != level or k not in by_trial:
                continue
            s = by_trial[k]
            (pos if t["label"] == LESION else neg).append(s)
            hist.setdefault(t["label"], []).append(s)
        if not pos or not neg:
            continue
        auc = roc.wilcoxon_auc(pos, neg)
        d = roc.dprime(auc)
        histograms = {
            label: [int(c) for c in roc.score_histogram(
                scores, n_bins=N_SCORE_LEVELS, score_range=(0.0, roc.SCORE_SCALE_MAX))]
            for label, scores in sorted(hist.items())
        }
        out["levels"].append({
            "level": level,
            "auc": auc,
            # degenerate AUC maps d' to +/-inf, which JSON cannot carry
            "dprime": d if np.isfinite(d) else None,
            "n_lesion": len(pos),
            "n_healthy": len(neg),
            "histograms": histograms,
        })
    if not out["levels"]:
        raise HTTPException(status_code=409,
                            detail="no complete condition pair scored")
    return out


def replay_session(directory: str) -> dict:
    """Recompute study results purely from the persisted session files."""
    with open(os.path.join(directory, "session.json")) as f:
        data = json.load(f)
    records = []
    log = os.path.join(directory, "log.jsonl")
    if os.path.exists(log):
        with open(log) as f:
            records = [json.loads(line) for line in f]
    return compute_results(records, data["trials"])


def create_app(cfg) -> FastAPI:
    """Build the FastAPI app over cfg.out_dir/{dataset,sessions}."""
    dataset_dir = os.path.join(cfg.out_dir, "dataset")
    sessions_dir = os.path.join(cfg.out_dir, "sessions")
    os.makedirs(sessions_dir, exist_ok=True)

    app = FastAPI(title="vreader study service")
    app.state.sessions = {}
    app.state.registry_lock = threading.Lock()

    def manifest():
        path = os.path.join(dataset_dir, "manifest.json")
        if not os.path.exists(path):
            raise HTTPException(status_code=409,
                                detail=f"no dataset at {dataset_dir}")
        return load_manifest(path)

    def get_session(session_id: str) -> Session:
        with app.state.registry_lock:
            sess = app.state.sessions.get(session_id)
        if sess is None:
            directory = os.path.join(sessions_dir, session_id)
            path = os.path.join(directory, "session.json")
            if not os.path.exists(path):
                raise HTTPException(status_code=404, detail="unknown session")
            with open(path) as f:
                sess = Session(json.load(f), directory)
            with app.state.registry_lock:
                sess = app.state.sessions.setdefault(session_id, sess)
        return sess

    def public_state(sess: Session) -> dict:
        return {
            "session_id": sess.data["session_id"],
            "n_trials": sess.n_trials,
            "n_frames": sess.data["n_frames"],
            "frame_rate": sess.data["plan"]["frame_rate"],
            "trials": [t["token"] for t in sess.data["trials"]],
            "scored": sorted(sess.scores),
            "complete": sess.complete,
        }

    @app.post("/api/sessions", status_code=201)
    def create_session(plan: StudyPlan):
        for cell in plan.conditions:
            if len(cell) != 2 or str(cell[1]) not in (HEALTHY, LESION):
                raise HTTPException(status_code=422,
                                    detail=f"bad condition cell {cell!r}")
        if plan.stacks_per_condition < 1:
            raise HTTPException(status_code=422,
                                detail="stacks_per_condition must be >= 1")
        mf = manifest()
        sess = _build_session(plan, mf, sessions_dir)
        first, _ = _load_trial_stack(mf["_dir"], sess.data["trials"][0]["stack_id"])
        sess.data["n_frames"] = int(first.voxels.shape[0])
        with open(os.path.join(sess.directory, "session.json"), "w") as f:
            json.dump(sess.data, f, indent=1, sort_keys=True)
        with app.state.registry_lock:
            app.state.sessions[sess.data["session_id"]] = sess
        return public_state(sess)

    @app.get("/api/sessions/{session_id}")
    def session_state(session_id: str):
        return public_state(get_session(session_id))

    @app.get("/api/sessions/{session_id}/trials/{k}/frames/{f}")
    def get_frame(session_id: str, k: int, f: int):
        sess = get_session(session_id)
        trial = sess.trial(k)
        if not 1 <= f <= sess.data["n_frames"]:
            raise HTTPException(status_code=422, detail="frame index out of range")
        stack, (lo, hi) = _load_trial_stack(sess.data["dataset_dir"],
                                            trial["stack_id"])
        frame = stack.voxels[f - 1]
        if hi > lo:
            img = np.clip((frame - lo) * (255.0 / (hi - lo)), 0.0, 255.0)
        else:
            img = np.zeros_like(frame)
        png = io.BytesIO()
        Image.fromarray(np.round(img).astype(np.uint8), mode="L").save(png, "PNG")
        return Response(content=png.getvalue(), media_type="image/png")

    @app.post("/api/sessions/{session_id}/trials/{k}/score", status_code=201)
    def submit_score(session_id: str, k: int, submission: ScoreSubmission):
        sess = get_session(session_id)
        trial = sess.trial(k)
        if submission.score not in range(N_SCORE_LEVELS):
            raise HTTPException(status_code=422, detail="score must be in 0..3")
        with sess.lock:
            if k in sess.scores:
                raise HTTPException(status_code=409, detail="trial already scored")
            record = {
                "session_id": session_id,
                "trial": k,
                "token": trial["token"],
                "stack_id": trial["stack_id"],
                "score": submission.score,
                "response_time_ms": submission.response_time_ms,
                "frame_rate": sess.data["plan"]["frame_rate"],
            }
            with open(sess.log_path, "a") as logf:
                logf.write(json.dumps(record, sort_keys=True) + "\n")
            sess.scores[k] = record
        return {"scored": len(sess.scores), "n_trials": sess.n_trials,
                "complete": sess.complete}

    @app.get("/api/sessions/{session_id}/results")
    def results(session_id: str):
        sess = get_session(session_id)
        # results expose label/level structure, so they stay sealed until
        # every trial is scored (blinding invariant)
        if not sess.complete:
            raise HTTPException(status_code=409, detail="session not complete")
        records = [sess.scores[k] for k in sorted(sess.scores)]
        return compute_results(records, sess.data["trials"])

    return app
