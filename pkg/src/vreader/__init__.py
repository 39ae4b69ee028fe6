"""Virtual reader workbench.

A numpy/scipy library for simulating lesion-detection reading of
tomosynthesis-like image stacks: synthetic stack generation with
controllable background complexity, a band-pass viewing-stage surrogate,
lesion-cue and complexity features, a linear complexity estimator,
confidence-modulated minimum-rank decision fusion, and nonparametric ROC
analysis, plus an HTTP service for human reader studies.
"""

from .stacks import (GenConfig, Stack, generate_background, add_complexity_noise,
                     insert_lesion, make_stack, generate_dataset, load_manifest,
                     iter_manifest_stacks, save_stack, load_stack,
                     normalize_to_range)
from .hvs import HvsConfig, apply_hvs
from .metrics import psnr, ssim
from .features import (RoiGeometry, LesionFeatures, ComplexityFeatures,
                       compute_lesion_features, compute_complexity_features,
                       region_mean, region_energy)
from .hotelling import (HotellingModel, train_hotelling, score, feature_power,
                        select_top_k, normalized_complexity, export_coefficients)
from .decision import (DecisionConfig, FeatureRecord, StackScore,
                       perturb_features, rank_by_feature, min_rank_combine,
                       decide_dataset, lesion_feature_scales)
from .roc import (RocResult, wilcoxon_auc, dprime, erfinv, score_histogram,
                  scale_scores, grouped_ci, partition_groups)
from .pipeline import (ExperimentConfig, build_records, run_power_table,
                       run_detection_table, run_all)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
