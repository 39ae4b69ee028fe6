"""Confidence-modulated decision block.

Lesion cues are perturbed with zero-mean Gaussian noise whose standard
deviation is kappa * c_hat * s_j (c_hat = estimated background complexity
in [0, 1], s_j = per-feature spread over simple-background training
stacks), then stacks are ranked per feature and the elementwise minimum
of the three ranks is the final score: agreeing sub-decisions preserve
the ranking, disagreeing ones pile mass onto low ranks.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .features import ComplexityFeatures, LesionFeatures
from .hotelling import HotellingModel, normalized_complexity
from .rng import derive_rng

ESTIMATION_MODES = ("none", "ideal", "pre_hvs", "post_hvs")
MAX_LEVEL = 4


@dataclass(frozen=True)
class DecisionConfig:
    kappa: float = 8.0
    estimation_mode: str = "none"
    binary_complexity: bool = True  # threshold c_hat at 0.5
    rng_tag: str = "decision"

    def validate(self):
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if self.estimation_mode not in ESTIMATION_MODES:
            raise ValueError(f"estimation_mode must be one of {ESTIMATION_MODES}")


@dataclass
class StackScore:
    stack_id: int
    c_hat: float
    features: LesionFeatures  # perturbed values
    r1: int = 0
    r2: int = 0
    r3: int = 0
    score: int = 0  # min(r1, r2, r3)


@dataclass
class FeatureRecord:
    """Per-stack feature bundle consumed by the decision block."""
    stack_id: int
    label: str
    level: int
    lesion: LesionFeatures          # cues from the viewed (post-HVS) stack
    pre: ComplexityFeatures         # complexity features before the HVS stage
    post: ComplexityFeatures        # complexity features after the HVS stage


def perturb_features(lf: LesionFeatures, c_hat: float, kappa: float,
                     scales, rng) -> LesionFeatures:
    """Add independent zero-mean Gaussian noise of std kappa*c_hat*s_j."""
    scales = np.asarray(scales, dtype=float)
    if np.any(scales <= 0):
        raise ValueError("feature scales must be positive")
    sd = kappa * c_hat
    if sd == 0.0:
        return lf
    eps = rng.standard_normal(3) * (sd * scales)
    return LesionFeatures(f1=lf.f1 + eps[0], f2=lf.f2 + eps[1], f3=lf.f3 + eps[2])


def rank_by_feature(values, stack_ids) -> np.ndarray:
    """Ascending ranks 1..N; higher value -> higher rank; ties broken by
    ascending stack_id so the ranking is deterministic."""
    values = np.asarray(values, dtype=float)
    stack_ids = np.asarray(stack_ids)
    if not np.isfinite(values).all():
        raise ValueError("non-finite feature values")
    order = np.lexsort((stack_ids, values))
    ranks = np.empty(len(values), dtype=int)
    ranks[order] = np.arange(1, len(values) + 1)
    return ranks


def min_rank_combine(r1, r2, r3) -> np.ndarray:
    r1, r2, r3 = (np.asarray(r) for r in (r1, r2, r3))
    if not (r1.shape == r2.shape == r3.shape):
        raise ValueError("rank vectors must have equal length")
    return np.minimum(np.minimum(r1, r2), r3)


def estimate_c_hat(record: FeatureRecord, cfg: DecisionConfig,
                   model: Optional[HotellingModel]) -> float:
    """Per-stack complexity estimate for the configured mode."""
    if cfg.estimation_mode == "none":
        return 0.0
    if cfg.estimation_mode == "ideal":
        return record.level / MAX_LEVEL
    if model is None:
        raise ValueError(f"mode {cfg.estimation_mode!r} needs a trained model")
    b3 = record.pre.b3 if cfg.estimation_mode == "pre_hvs" else record.post.b3
    f = np.asarray(b3, dtype=float)[list(model.feature_spec)]
    c = normalized_complexity(model, f)
    if cfg.binary_complexity:
        c = 1.0 if c >= 0.5 else 0.0
    return c


def decide_dataset(records: List[FeatureRecord], cfg: DecisionConfig,
                   scales, master_seed: int,
                   model: Optional[HotellingModel] = None) -> List[StackScore]:
    """Score an evaluation set: per-stack complexity estimate, feature
    perturbation, three joint rankings, min-rank combination."""
    cfg.validate()
    out = []
    for rec in records:
        c_hat = estimate_c_hat(rec, cfg, model)
        rng = derive_rng(master_seed, rec.stack_id, cfg.rng_tag)
        lf = perturb_features(rec.lesion, c_hat, cfg.kappa, scales, rng)
        out.append(StackScore(stack_id=rec.stack_id, c_hat=c_hat, features=lf))
    ids = [s.stack_id for s in out]
    r1 = rank_by_feature([s.features.f1 for s in out], ids)
    r2 = rank_by_feature([s.features.f2 for s in out], ids)
    r3 = rank_by_feature([s.features.f3 for s in out], ids)
    final = min_rank_combine(r1, r2, r3)
    for s, a, b, c, m in zip(out, r1, r2, r3, final):
        s.r1, s.r2, s.r3, s.score = int(a), int(b), int(c), int(m)
    return out


def lesion_feature_scales(records: List[FeatureRecord]) -> np.ndarray:
    """Per-feature standard deviation over simple-background (level 0)
    stacks; the unit for the perturbation noise."""
    simple = [r for r in records if r.level == 0]
    if len(simple) < 2:
        raise ValueError("need >= 2 level-0 stacks to set feature scales")
    mat = np.array([r.lesion.as_array() for r in simple])
    scales = mat.std(axis=0, ddof=1)
    if np.any(scales <= 0):
        raise ValueError("degenerate feature scales")
    return scales
