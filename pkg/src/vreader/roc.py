"""ROC machinery: Wilcoxon AUC, detectability index, histograms, and the
grouped confidence-interval protocol.

AUC is the nonparametric pair-counting estimate with ties credited 0.5.
The detectability index is d = 2*erfinv(2*AUC - 1); erfinv is computed
in-package (rational initial guess refined by Newton steps on math.erf)
so the conversion does not depend on an external special-function library.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import rankdata


@dataclass
class RocResult:
    auc: float
    dprime: float
    n_pos: int
    n_neg: int
    ci_halfwidth: Optional[float] = None

    @property
    def dprime_finite(self) -> bool:
        return math.isfinite(self.dprime)


def wilcoxon_auc(pos, neg) -> float:
    """(wins + 0.5 * ties) / (n_pos * n_neg) via midranks."""
    pos = np.asarray(pos, dtype=float)
    neg = np.asarray(neg, dtype=float)
    if pos.size == 0 or neg.size == 0:
        raise ValueError("both score sets must be non-empty")
    ranks = rankdata(np.concatenate([pos, neg]))
    rank_sum = ranks[: pos.size].sum()
    u = rank_sum - pos.size * (pos.size + 1) / 2.0
    return float(u / (pos.size * neg.size))


# -- inverse error function ------------------------------------------------

def erfinv(y: float) -> float:
    """Inverse error function, |y| < 1, accurate to ~1e-15.

    Initial rational approximation (central and tail branches) refined by
    Newton iterations on erf.
    """
    if not -1.0 < y < 1.0:
        raise ValueError("erfinv domain is (-1, 1)")
    if y == 0.0:
        return 0.0
    a = abs(y)
    if a <= 0.7:
        # central branch: series-based rational guess
        z = y * y
        num = y * (((-0.140543331 * z + 0.914624893) * z - 1.645349621) * z + 0.886226899)
        den = (((0.012229801 * z - 0.329097515) * z + 1.442710462) * z - 2.118377725) * z + 1.0
        x = num / den
    else:
        z = math.sqrt(-math.log((1.0 - a) / 2.0))
        num = ((1.641345311 * z + 3.429567803) * z - 1.624906493) * z - 1.970840454
        den = (1.637067800 * z + 3.543889200) * z + 1.0
        x = math.copysign(num / den, y)
    # Newton refinement: f(x) = erf(x) - y, f'(x) = 2/sqrt(pi) exp(-x^2)
    sqrt_pi_over_2 = math.sqrt(math.pi) / 2.0
    for _ in range(3):
        err = math.erf(x) - y
        x -= err * sqrt_pi_over_2 * math.exp(x * x)
    return x


def dprime(auc: float) -> float:
    """2*erfinv(2*AUC - 1); +/-inf sentinel at the degenerate endpoints."""
    if not 0.0 <= auc <= 1.0:
        raise ValueError("AUC must lie in [0, 1]")
    if auc == 1.0:
        return math.inf
    if auc == 0.0:
        return -math.inf
    return 2.0 * erfinv(2.0 * auc - 1.0)


# -- score histograms ------------------------------------------------------

SCORE_SCALE_MAX = 3.0  # reader-study score axis


def scale_scores(scores, lo=None, hi=None) -> np.ndarray:
    """Affinely map scores onto the [0, 3] reader-score axis."""
    scores = np.asarray(scores, dtype=float)
    lo = scores.min() if lo is None else lo
    hi = scores.max() if hi is None else hi
    if hi <= lo:
        raise ValueError("degenerate score range")
    return (scores - lo) * (SCORE_SCALE_MAX / (hi - lo))


def score_histogram(scores, n_bins: int = 4, score_range=None):
    """Bin counts of scores after scaling to [0, 3]."""
    if n_bins < 2:
        raise ValueError("n_bins must be >= 2")
    lo, hi = score_range if score_range is not None else (None, None)
    scaled = scale_scores(scores, lo, hi)
    counts, _ = np.histogram(scaled, bins=n_bins, range=(0.0, SCORE_SCALE_MAX))
    return counts


# -- grouped confidence intervals ------------------------------------------

def partition_groups(strata, n_groups: int, rng) -> list:
    """Split item indices into equal groups, stratified and seeded.

    `strata` maps each item to a stratum key; items of each stratum are
    shuffled and dealt round-robin so every group carries a balanced mix.
    """
    strata = list(strata)
    groups = [[] for _ in range(n_groups)]
    by_stratum = {}
    for idx, key in enumerate(strata):
        by_stratum.setdefault(key, []).append(idx)
    for key in sorted(by_stratum, key=str):
        members = np.array(by_stratum[key])
        rng.shuffle(members)
        for j, idx in enumerate(members):
            groups[j % n_groups].append(int(idx))
    return [sorted(g) for g in groups]


def grouped_ci(train_groups, eval_group, train, evaluate) -> RocResult:
    """Train one estimator instance per training group, score each on the
    held-out group, report mean AUC +/- twice the standard deviation."""
    aucs = []
    n_pos = n_neg = 0
    for g in train_groups:
        model = train(g)
        auc, n_pos, n_neg = evaluate(model, eval_group)
        aucs.append(auc)
    aucs = np.asarray(aucs, dtype=float)
    mean = float(aucs.mean())
    std = float(aucs.std(ddof=1)) if aucs.size > 1 else 0.0
    return RocResult(auc=mean, dprime=dprime(min(max(mean, 0.0), 1.0)),
                     n_pos=n_pos, n_neg=n_neg, ci_halfwidth=2.0 * std)
