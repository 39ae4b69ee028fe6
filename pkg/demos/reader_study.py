"""Scripted reader session against the in-process study service.

Builds a small three-level dataset, opens a blinded session, plays a
simple scripted reader through all trials (it fetches a few frames per
stack, then scores), and prints the per-level ROC the service computes
from the session log.
"""

import argparse
import os

import numpy as np
from fastapi.testclient import TestClient

from vreader import ExperimentConfig, GenConfig, generate_dataset
from vreader.service import create_app

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default="study_out")
parser.add_argument("--stacks-per-condition", type=int, default=5)
args = parser.parse_args()

cfg = ExperimentConfig(gen=GenConfig(), n_per_cell=args.stacks_per_condition,
                       levels=(0, 2, 4), out_dir=args.out)
dataset_dir = os.path.join(cfg.out_dir, "dataset")
if not os.path.exists(os.path.join(dataset_dir, "manifest.json")):
    print("generating dataset...")
    generate_dataset(cfg.gen, cfg.n_per_cell, cfg.levels, dataset_dir, workers=4)

client = TestClient(create_app(cfg))
plan = {
    "conditions": [[lv, lb] for lv in cfg.levels for lb in ("healthy", "lesion")],
    "stacks_per_condition": args.stacks_per_condition,
    "seed": 1,
    "frame_rate": 10.0,
}
session = client.post("/api/sessions", json=plan).json()
sid = session["session_id"]
print(f"session {sid[:8]}..., {session['n_trials']} blinded trials, "
      f"{session['n_frames']} frames each")

rng = np.random.default_rng(0)
for k in range(1, session["n_trials"] + 1):
    # the scripted reader skims the stack, then guesses mostly at chance
    for f in (1, 16, 32):
        client.get(f"/api/sessions/{sid}/trials/{k}/frames/{f}")
    client.post(f"/api/sessions/{sid}/trials/{k}/score",
                json={"score": int(rng.integers(0, 4)),
                      "response_time_ms": float(rng.integers(400, 3000))})

results = client.get(f"/api/sessions/{sid}/results").json()
print("\nper-level results (random scorer, so AUC should hover near 0.5):")
for lv in results["levels"]:
    d = lv["dprime"]
    d_txt = f"{d:.2f}" if d is not None else "inf"
    print(f"  level {lv['level']}: AUC={lv['auc']:.3f} d'={d_txt} "
          f"histograms lesion={lv['histograms']['lesion']} "
          f"healthy={lv['histograms']['healthy']}")
print(f"\nsession log: {os.path.join(cfg.out_dir, 'sessions', sid, 'log.jsonl')}")
