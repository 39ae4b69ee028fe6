"""End-to-end experiment orchestration.

One JSON config drives: dataset generation (cached on disk), viewing-stage
filtering, feature extraction, the feature-power table, the detection
table across the four complexity-estimation modes (with grouped
confidence intervals), weight-profile export, and score histograms.
Everything is keyed off the master seed; a rerun with the same config
produces a byte-identical report at any worker count.
"""

import csv
import io
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from typing import List, Optional

import numpy as np

from . import roc
from .decision import (DecisionConfig, FeatureRecord, decide_dataset,
                       lesion_feature_scales)
from .features import compute_complexity_features, compute_lesion_features
from .hotelling import (HotellingModel, export_coefficients, feature_power,
                        score, select_top_k, train_hotelling)
from .hvs import HvsConfig, apply_hvs
from .rng import derive_rng
from .stacks import (HEALTHY, LESION, GenConfig, generate_dataset,
                     iter_manifest_stacks, load_manifest)

MODES = ("post_hvs", "pre_hvs", "ideal", "none")


@dataclass
class ExperimentConfig:
    gen: GenConfig = field(default_factory=GenConfig)
    hvs: HvsConfig = field(default_factory=HvsConfig)
    decision: DecisionConfig = field(default_factory=DecisionConfig)
    n_per_cell: int = 100
    levels: tuple = (0, 4)
    out_dir: str = "vreader_out"
    workers: int = 1

    @property
    def master_seed(self) -> int:
        return self.gen.master_seed

    def to_json(self) -> dict:
        d = {
            "gen": asdict(self.gen),
            "hvs": asdict(self.hvs),
            "decision": asdict(self.decision),
            "n_per_cell": self.n_per_cell,
            "levels": list(self.levels),
            "out_dir": self.out_dir,
            "workers": self.workers,
        }
        d["gen"]["dims"] = list(self.gen.dims)
        d["gen"]["complexity_amplitudes"] = list(self.gen.complexity_amplitudes)
        return d

    @classmethod
    def from_json(cls, data: dict, seed: Optional[int] = None) -> "ExperimentConfig":
        gen = GenConfig(**data.get("gen", {}))
        if seed is not None:
            gen = GenConfig(**{**asdict(gen), "master_seed": int(seed)})
        return cls(
            gen=gen,
            hvs=HvsConfig(**data.get("hvs", {})),
            decision=DecisionConfig(**data.get("decision", {})),
            n_per_cell=int(data.get("n_per_cell", 100)),
            levels=tuple(data.get("levels", (0, 4))),
            out_dir=data.get("out_dir", "vreader_out"),
            workers=int(data.get("workers", 1)),
        )

    @classmethod
    def load(cls, path: str, seed: Optional[int] = None) -> "ExperimentConfig":
        with open(path) as f:
            return cls.from_json(json.load(f), seed=seed)


# -- feature extraction ----------------------------------------------------

def record_from_stack(stack, hvs_cfg: HvsConfig) -> FeatureRecord:
    """Features for one stack: viewed (post-HVS) cues and both complexity
    feature variants."""
    post = apply_hvs(stack, hvs_cfg)
    return FeatureRecord(
        stack_id=stack.stack_id,
        label=stack.label,
        level=stack.complexity_level,
        lesion=compute_lesion_features(post),
        pre=compute_complexity_features(stack),
        post=compute_complexity_features(post),
    )


def build_records(cfg: ExperimentConfig, dataset_dir: Optional[str] = None) -> List[FeatureRecord]:
    """Generate (or reuse) the dataset on disk, then extract all features.

    Features are always computed from the stored float32 voxels so cached
    and fresh runs are bit-identical.
    """
    dataset_dir = dataset_dir or os.path.join(cfg.out_dir, "dataset")
    manifest_path = os.path.join(dataset_dir, "manifest.json")
    if not os.path.exists(manifest_path):
        generate_dataset(cfg.gen, cfg.n_per_cell, cfg.levels, dataset_dir,
                         workers=cfg.workers)
    manifest = load_manifest(manifest_path)
    stacks = list(iter_manifest_stacks(manifest))
    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(lambda s: record_from_stack(s, cfg.hvs), stacks))
    else:
        records = [record_from_stack(s, cfg.hvs) for s in stacks]
    records.sort(key=lambda r: r.stack_id)
    return records


# -- feature matrices ------------------------------------------------------

def _matrix(records, feature_set: str, variant: str) -> np.ndarray:
    def row(r):
        cf = r.pre if variant == "pre" else r.post
        if feature_set == "f1f2f3":
            return r.lesion.as_array()
        if feature_set == "b1":
            return [cf.b1]
        if feature_set == "b2":
            return [cf.b2]
        if feature_set == "b3":
            return cf.b3
        if feature_set == "b4":
            return cf.b4
        raise ValueError(f"unknown feature set {feature_set!r}")
    return np.array([np.asarray(row(r), dtype=float) for r in records])


def _power_entry(records, feature_set, variant, task, lo_level, hi_level):
    """Train + score a Hotelling observer on the pooled set (train = test)
    and report its separation power."""
    if task == "complexity":
        cls0 = [r for r in records if r.level == lo_level]
        cls1 = [r for r in records if r.level == hi_level]
    else:  # lesion detection
        cls0 = [r for r in records if r.label == HEALTHY]
        cls1 = [r for r in records if r.label == LESION]
    m0 = _matrix(cls0, feature_set, variant)
    m1 = _matrix(cls1, feature_set, variant)
    model = train_hotelling(m0, m1)
    power, swapped = feature_power(m0 @ model.w, m1 @ model.w)
    return {
        "feature_set": feature_set,
        "variant": variant,
        "task": task,
        "auc": power,
        "dprime": roc.dprime(power),
        "swapped": swapped,
    }, model


def run_power_table(records: List[FeatureRecord], levels=(0, 4)):
    """Feature-power comparisons: complexity power of every candidate set
    (viewed-stage features), the pre-filter b3 gain, the top-5 reduced b3
    set, and the lesion-detection power of b3/b4."""
    lo, hi = min(levels), max(levels)
    rows = []
    models = {}
    for fs in ("f1f2f3", "b1", "b2", "b3", "b4"):
        row, model = _power_entry(records, fs, "post", "complexity", lo, hi)
        rows.append(row)
        models[(fs, "post")] = model
    row, model = _power_entry(records, "b3", "pre", "complexity", lo, hi)
    rows.append(row)
    models[("b3", "pre")] = model

    # reduced model from the five largest-magnitude b3 weights
    full = models[("b3", "post")]
    top5 = select_top_k(full, 5)
    cls0 = _matrix([r for r in records if r.level == lo], "b3", "post")[:, top5]
    cls1 = _matrix([r for r in records if r.level == hi], "b3", "post")[:, top5]
    reduced = train_hotelling(cls0, cls1, feature_spec=top5)
    power, swapped = feature_power(cls0 @ reduced.w, cls1 @ reduced.w)
    rows.append({"feature_set": "b3_top5", "variant": "post", "task": "complexity",
                 "auc": power, "dprime": roc.dprime(power), "swapped": swapped,
                 "selected": list(int(i) for i in top5)})
    models[("b3_top5", "post")] = reduced

    for fs in ("b3", "b4"):
        row, _ = _power_entry(records, fs, "post", "detection", lo, hi)
        rows.append(row)
    return rows, models


# -- detection table -------------------------------------------------------

def _detection_auc(scored, records_by_id):
    pos, neg = [], []
    for s in scored:
        rec = records_by_id[s.stack_id]
        (pos if rec.label == LESION else neg).append(s.score)
    return roc.wilcoxon_auc(pos, neg), len(pos), len(neg)


def _train_complexity_model(records, variant: str, levels) -> HotellingModel:
    lo, hi = min(levels), max(levels)
    m0 = _matrix([r for r in records if r.level == lo], "b3", variant)
    m1 = _matrix([r for r in records if r.level == hi], "b3", variant)
    return train_hotelling(m0, m1)


def run_detection_table(records: List[FeatureRecord], cfg: ExperimentConfig):
    """Partitioned-mode detection performance per (level x estimation mode).

    The dataset is split into four stratified groups; estimator modes train
    three single-group instances and report mean AUC +/- 2 std on the
    held-out group, while the ideal/none modes (no training) are evaluated
    on the same held-out stacks so cells are directly comparable.
    """
    levels = sorted(set(r.level for r in records))
    cell_counts = {}
    for r in records:
        cell_counts[(r.level, r.label)] = cell_counts.get((r.level, r.label), 0) + 1
    if min(cell_counts.values()) < 4:
        raise ValueError("detection table needs >= 4 stacks per (level, label) "
                         "cell so every group holds both classes")
    rng = derive_rng(cfg.master_seed, "groups")
    groups = roc.partition_groups([(r.level, r.label) for r in records], 4, rng)
    train_groups, eval_group = groups[:3], groups[3]
    train_records = [records[i] for i in sum(train_groups, [])]
    scales = lesion_feature_scales(train_records)
    by_id = {r.stack_id: r for r in records}

    def eval_mode_level(mode, level, model):
        dcfg = DecisionConfig(kappa=cfg.decision.kappa, estimation_mode=mode,
                              binary_complexity=cfg.decision.binary_complexity)
        subset = [records[i] for i in eval_group if records[i].level == level]
        scored = decide_dataset(subset, dcfg, scales, cfg.master_seed, model=model)
        return _detection_auc(scored, by_id)

    table = {}
    for mode in MODES:
        variant = {"post_hvs": "post", "pre_hvs": "pre"}.get(mode)
        for level in levels:
            if variant is None:
                auc, n_pos, n_neg = eval_mode_level(mode, level, None)
                result = roc.RocResult(auc=auc, dprime=roc.dprime(auc),
                                       n_pos=n_pos, n_neg=n_neg)
            else:
                result = roc.grouped_ci(
                    train_groups, eval_group,
                    train=lambda g: _train_complexity_model(
                        [records[i] for i in g], variant, levels),
                    evaluate=lambda model, _g: eval_mode_level(mode, level, model))
            table[(mode, level)] = result

    lo, hi = min(levels), max(levels)
    cells = []
    for mode in MODES:
        r_lo, r_hi = table[(mode, lo)], table[(mode, hi)]
        d_lo, d_hi = r_lo.dprime, r_hi.dprime
        drop_auc = r_lo.auc - r_hi.auc
        drop_pct = 100.0 * (d_lo - d_hi) / d_lo if d_lo > 0 else float("nan")
        for level, res in ((lo, r_lo), (hi, r_hi)):
            cells.append({"mode": mode, "level": level, "auc": res.auc,
                          "dprime": res.dprime, "ci_halfwidth": res.ci_halfwidth,
                          "n_pos": res.n_pos, "n_neg": res.n_neg})
        cells.append({"mode": mode, "level": "drop", "auc": drop_auc,
                      "dprime": d_lo - d_hi, "drop_pct": drop_pct})
    return cells


# -- histograms ------------------------------------------------------------

def run_histograms(records: List[FeatureRecord], cfg: ExperimentConfig,
                   models: dict, n_bins: int = 4):
    """Score histograms per (mode x level x label), min-rank scores scaled
    onto the [0, 3] reader-score axis of each evaluation set."""
    levels = sorted(set(r.level for r in records))
    scales = lesion_feature_scales(records)
    out = []
    for mode in MODES:
        model = {"post_hvs": models.get(("b3", "post")),
                 "pre_hvs": models.get(("b3", "pre"))}.get(mode)
        dcfg = DecisionConfig(kappa=cfg.decision.kappa, estimation_mode=mode,
                              binary_complexity=cfg.decision.binary_complexity)
        for level in levels:
            subset = [r for r in records if r.level == level]
            scored = decide_dataset(subset, dcfg, scales, cfg.master_seed, model=model)
            all_scores = np.array([s.score for s in scored], dtype=float)
            lo_s, hi_s = all_scores.min(), all_scores.max()
            by_id = {r.stack_id: r for r in subset}
            for label in (HEALTHY, LESION):
                sel = np.array([by_id[s.stack_id].label == label for s in scored])
                scaled = roc.scale_scores(all_scores[sel], lo_s, hi_s)
                counts, _ = np.histogram(scaled, bins=n_bins,
                                         range=(0.0, roc.SCORE_SCALE_MAX))
                out.append({"mode": mode, "level": level, "label": label,
                            "counts": [int(c) for c in counts],
                            "mean_scaled_score": float(scaled.mean())})
    return out


# -- report bundle ---------------------------------------------------------

def _csv_text(rows, fieldnames) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fieldnames, extrasaction="ignore",
                            lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def run_all(cfg: ExperimentConfig) -> dict:
    """Full experiment: dataset, power table, detection table, coefficient
    export, histograms; writes report.json plus CSVs under out_dir."""
    records = build_records(cfg)
    power_rows, models = run_power_table(records, cfg.levels)
    detection_cells = run_detection_table(records, cfg)
    histograms = run_histograms(records, cfg, models)
    coeffs = [{"feature_index": i + 1, "weight": w}
              for i, w in export_coefficients(models[("b3", "post")])]

    report_cfg = cfg.to_json()
    for execution_key in ("workers", "out_dir"):
        report_cfg.pop(execution_key, None)
    report = {
        "config": report_cfg,
        "power_table": power_rows,
        "detection_table": detection_cells,
        "coefficients": coeffs,
        "histograms": histograms,
    }

    outputs = {
        "report.json": json.dumps(report, indent=1, sort_keys=True,
                                  allow_nan=True) + "\n",
        "power.csv": _csv_text(power_rows,
                               ["feature_set", "variant", "task", "auc",
                                "dprime", "swapped"]),
        "detection.csv": _csv_text(detection_cells,
                                   ["mode", "level", "auc", "dprime",
                                    "ci_halfwidth", "drop_pct"]),
        "coefficients.csv": _csv_text(coeffs, ["feature_index", "weight"]),
        "histograms.csv": _csv_text(
            [{**h, "counts": " ".join(map(str, h["counts"]))} for h in histograms],
            ["mode", "level", "label", "counts", "mean_scaled_score"]),
    }
    os.makedirs(cfg.out_dir, exist_ok=True)
    written = []
    try:
        for name, text in outputs.items():
            path = os.path.join(cfg.out_dir, name)
            with open(path, "w") as f:
                f.write(text)
            written.append(path)
    except Exception:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        raise
    return report
