"""Linear (Hotelling) discriminant for background-complexity estimation.

The weight vector solves (S0 + S1 + ridge*I) w = mu1 - mu0 with class
covariances S0/S1; a single-feature model is fixed at w = 1. Trained
models carry calibration anchors (class-median training scores) so raw
scores can be mapped to a normalized complexity in [0, 1].
"""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .roc import wilcoxon_auc


class InsufficientDataError(ValueError):
    pass


@dataclass
class HotellingModel:
    w: np.ndarray
    mu0: np.ndarray
    mu1: np.ndarray
    ridge: float
    calib_lo: float
    calib_hi: float
    feature_spec: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.w)

    def to_json(self) -> dict:
        return {
            "w": list(map(float, self.w)),
            "mu0": list(map(float, self.mu0)),
            "mu1": list(map(float, self.mu1)),
            "ridge": self.ridge,
            "calib_lo": self.calib_lo,
            "calib_hi": self.calib_hi,
            "feature_spec": list(self.feature_spec),
        }

    @classmethod
    def from_json(cls, data: dict) -> "HotellingModel":
        return cls(w=np.asarray(data["w"], dtype=float),
                   mu0=np.asarray(data["mu0"], dtype=float),
                   mu1=np.asarray(data["mu1"], dtype=float),
                   ridge=float(data["ridge"]),
                   calib_lo=float(data["calib_lo"]),
                   calib_hi=float(data["calib_hi"]),
                   feature_spec=list(data.get("feature_spec", [])))

    def save(self, path: str):
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "HotellingModel":
        with open(path) as f:
            return cls.from_json(json.load(f))


RIDGE_SCALE = 1e-6  # fraction of mean pooled-covariance diagonal


def train_hotelling(f0, f1, feature_spec=None) -> HotellingModel:
    """Fit the discriminant from per-class sample matrices (rows = samples).

    Class 0 / class 1 are the low / high ends of the discriminated axis
    (e.g. simple vs complex background, or healthy vs lesion).
    """
    f0 = np.atleast_2d(np.asarray(f0, dtype=float))
    f1 = np.atleast_2d(np.asarray(f1, dtype=float))
    if f0.ndim != 2 or f1.ndim != 2 or f0.shape[1] != f1.shape[1]:
        raise ValueError("class sample matrices must share the feature dimension")
    if f0.shape[0] < 2 or f1.shape[0] < 2:
        raise InsufficientDataError("need >= 2 samples per class")
    if not (np.isfinite(f0).all() and np.isfinite(f1).all()):
        raise ValueError("non-finite feature values")
    n = f0.shape[1]
    mu0 = f0.mean(axis=0)
    mu1 = f1.mean(axis=0)
    if n == 1:
        w = np.array([1.0])
        ridge = 0.0
    else:
        pooled = np.cov(f0, rowvar=False, ddof=1) + np.cov(f1, rowvar=False, ddof=1)
        ridge = RIDGE_SCALE * np.trace(pooled) / n
        w = np.linalg.solve(pooled + ridge * np.eye(n), mu1 - mu0)
    s0 = f0 @ w
    s1 = f1 @ w
    return HotellingModel(w=w, mu0=mu0, mu1=mu1, ridge=float(ridge),
                          calib_lo=float(np.median(s0)),
                          calib_hi=float(np.median(s1)),
                          feature_spec=list(feature_spec) if feature_spec else list(range(n)))


def score(model: HotellingModel, f) -> float:
    """Inner product w^T f; also accepts a matrix of row samples."""
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != model.n:
        raise ValueError(f"feature length {f.shape[-1]} != model dim {model.n}")
    return f @ model.w


def feature_power(scores0, scores1):
    """Separation power as (max(AUC, 1-AUC), swapped) for class-0 vs class-1
    scores; the swap generalizes reporting an accidental inversion as its
    mirrored value."""
    auc = wilcoxon_auc(scores1, scores0)
    if auc < 0.5:
        return 1.0 - auc, True
    return auc, False


def select_top_k(model: HotellingModel, k: int) -> list:
    """Indices (into feature_spec) of the k largest-magnitude weights,
    ties broken by lower index; returned in ascending index order."""
    if not 1 <= k <= model.n:
        raise ValueError(f"k must be in 1..{model.n}")
    order = sorted(range(model.n), key=lambda i: (-abs(model.w[i]), i))
    picked = sorted(order[:k])
    return [model.feature_spec[i] for i in picked]


def normalized_complexity(model: HotellingModel, f) -> float:
    """Calibrated score mapped to [0, 1] between the class anchors."""
    if model.calib_hi <= model.calib_lo:
        raise ValueError("degenerate calibration: calib_hi <= calib_lo")
    s = score(model, f)
    c = (s - model.calib_lo) / (model.calib_hi - model.calib_lo)
    return float(np.clip(c, 0.0, 1.0))


def export_coefficients(model: HotellingModel) -> list:
    """(feature index, weight) rows, e.g. for plotting weight profiles."""
    return [(model.feature_spec[i], float(model.w[i])) for i in range(model.n)]
