"""Synthetic image-stack generation and on-disk dataset format.

Stacks are 3-D scalar volumes (slices x rows x cols, default 32x64x64)
built from Gaussian-filtered white noise around a mid-gray level.
Background complexity is varied by adding an independent, spatially very
smooth but temporally rough low-pass noise field at one of five energy
levels (level 0 adds nothing). A lesion, when present, is a hard disk of
radius 3 px added to the spatial center of slice 16 (1-based) only.

Everything is a pure function of (config, stack_id): regeneration is
bit-identical, and distinct stacks can be generated in parallel.
"""

import json
import os
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.ndimage import gaussian_filter

from .rng import derive_rng

MID_GRAY = 128.0
LESION_SLICE = 16  # 1-based slice index carrying the lesion

HEALTHY = "healthy"
LESION = "lesion"


class ConfigError(ValueError):
    pass


def default_complexity_amplitudes(base_noise_sigma: float) -> tuple:
    """Geometric amplitude ramp (0, a, 2a, 4a, 8a) with a = sigma/2."""
    a = base_noise_sigma / 2.0
    return (0.0, a, 2.0 * a, 4.0 * a, 8.0 * a)


@dataclass(frozen=True)
class GenConfig:
    """Generation parameters for synthetic stacks.

    The complexity field uses its own kernel: a large in-plane sigma makes
    the added lumps spatially smooth (so a band-pass viewing stage
    attenuates them strongly) while a small across-slice sigma makes them
    change quickly from slice to slice (so consecutive-slice comparisons
    still see them).
    """

    dims: tuple = (32, 64, 64)  # (S, H, W)
    lesion_radius: int = 3
    lesion_amplitude: float = 1.8
    base_noise_sigma: float = 30.0
    spatial_kernel_sigma: float = 0.9
    temporal_kernel_sigma: float = 2.0
    complexity_spatial_sigma: float = 10.0
    complexity_temporal_sigma: float = 0.25
    complexity_amplitudes: tuple = None
    master_seed: int = 20150950

    def __post_init__(self):
        if self.complexity_amplitudes is None:
            object.__setattr__(
                self,
                "complexity_amplitudes",
                default_complexity_amplitudes(self.base_noise_sigma),
            )
        else:
            object.__setattr__(
                self, "complexity_amplitudes", tuple(self.complexity_amplitudes)
            )
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))

    def validate(self):
        s, h, w = self.dims
        if s <= 0 or h <= 0 or w <= 0:
            raise ConfigError(f"non-positive dimensions: {self.dims}")
        if self.base_noise_sigma < 0:
            raise ConfigError("base_noise_sigma must be >= 0")
        for name in ("spatial_kernel_sigma", "temporal_kernel_sigma",
                     "complexity_spatial_sigma", "complexity_temporal_sigma"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be > 0")
        amps = self.complexity_amplitudes
        if len(amps) != 5:
            raise ConfigError("complexity_amplitudes must have 5 entries (levels 0..4)")
        if amps[0] != 0:
            raise ConfigError("complexity_amplitudes[0] must be 0")
        for lo, hi in zip(amps[1:], amps[2:]):
            if not hi > lo:
                raise ConfigError("complexity_amplitudes must be strictly increasing for levels 1..4")
        if self.lesion_radius < 0:
            raise ConfigError("lesion_radius must be >= 0")
        cy, cx = h // 2, w // 2
        r = self.lesion_radius
        if cy - r < 0 or cx - r < 0 or cy + r >= h or cx + r >= w:
            raise ConfigError("lesion footprint exceeds slice bounds")


@dataclass
class Stack:
    voxels: np.ndarray  # (S, H, W)
    stack_id: int
    label: str = HEALTHY
    complexity_level: int = 0
    seed: int = 0
    post_hvs: bool = False

    @property
    def dims(self):
        return self.voxels.shape


def disk_mask(h: int, w: int, radius: float, center=None) -> np.ndarray:
    """Boolean mask of integer grid points within `radius` of the center."""
    if center is None:
        center = (h // 2, w // 2)
    yy, xx = np.ogrid[:h, :w]
    d2 = (yy - center[0]) ** 2 + (xx - center[1]) ** 2
    return d2 <= radius * radius


def generate_background(cfg: GenConfig, stack_id: int) -> Stack:
    """Healthy base-texture stack: filtered white noise at fixed mean mid-gray."""
    cfg.validate()
    s, h, w = cfg.dims
    rng = derive_rng(cfg.master_seed, stack_id, "background")
    white = rng.standard_normal((s, h, w)) * cfg.base_noise_sigma
    sig = (cfg.temporal_kernel_sigma, cfg.spatial_kernel_sigma, cfg.spatial_kernel_sigma)
    filtered = gaussian_filter(white, sigma=sig, mode="wrap")
    voxels = filtered + (MID_GRAY - filtered.mean())
    return Stack(voxels=voxels, stack_id=stack_id, label=HEALTHY,
                 complexity_level=0, seed=cfg.master_seed)


def add_complexity_noise(stack: Stack, level: int, cfg: GenConfig) -> Stack:
    """Add the low-pass complexity field for `level`; level 0 is a no-op."""
    if not 0 <= level <= 4:
        raise ConfigError(f"complexity level must be in 0..4, got {level}")
    if level == 0:
        return replace(stack, voxels=stack.voxels.copy(), complexity_level=0)
    amp = cfg.complexity_amplitudes[level]
    s, h, w = stack.voxels.shape
    rng = derive_rng(cfg.master_seed, stack.stack_id, "complexity", level)
    white = rng.standard_normal((s, h, w)) * amp
    sig = (cfg.complexity_temporal_sigma, cfg.complexity_spatial_sigma,
           cfg.complexity_spatial_sigma)
    noise = gaussian_filter(white, sigma=sig, mode="wrap")
    return replace(stack, voxels=stack.voxels + noise, complexity_level=level)


def insert_lesion(stack: Stack, cfg: GenConfig) -> Stack:
    """Add the lesion disk on slice 16 (1-based); flips label to lesion."""
    if stack.label != HEALTHY:
        raise ValueError("insert_lesion requires a healthy stack")
    cfg.validate()
    s, h, w = stack.voxels.shape
    if s < LESION_SLICE:
        raise ConfigError(f"stack needs >= {LESION_SLICE} slices for a lesion")
    voxels = stack.voxels.copy()
    mask = disk_mask(h, w, cfg.lesion_radius)
    voxels[LESION_SLICE - 1][mask] += cfg.lesion_amplitude
    return replace(stack, voxels=voxels, label=LESION)


def make_stack(cfg: GenConfig, stack_id: int, label: str, level: int) -> Stack:
    """Full generation for one dataset cell entry."""
    stack = generate_background(cfg, stack_id)
    stack = add_complexity_noise(stack, level, cfg)
    if label == LESION:
        stack = insert_lesion(stack, cfg)
    elif label != HEALTHY:
        raise ValueError(f"unknown label {label!r}")
    return stack


NORMALIZATION_SIGMAS = 4.0


def normalization_range(voxels: np.ndarray):
    """Per-stack affine range used before any fixed-dynamic-range metric.

    mean +/- 4 std rather than min/max: the realized extremes of a noise
    volume fluctuate far more from stack to stack than its standard
    deviation, and that jitter would otherwise leak into every
    fixed-range metric as a common-mode offset.
    """
    v = np.asarray(voxels, dtype=np.float64)
    mu = float(v.mean())
    sd = float(v.std())
    return mu - NORMALIZATION_SIGMAS * sd, mu + NORMALIZATION_SIGMAS * sd


def normalize_to_range(voxels: np.ndarray, lo=None, hi=None) -> np.ndarray:
    """Affinely map voxels to [0, 255]; a constant stack maps to 0."""
    if lo is None or hi is None:
        lo, hi = normalization_range(voxels)
    if hi <= lo:
        return np.zeros_like(voxels, dtype=np.float64)
    return (np.asarray(voxels, dtype=np.float64) - lo) * (255.0 / (hi - lo))


# ---------------------------------------------------------------------------
# On-disk format: raw little-endian float32 voxels (slice-major) + JSON
# sidecar per stack, one manifest JSON per dataset.
# ---------------------------------------------------------------------------

def save_stack(stack: Stack, out_dir: str) -> str:
    """Write voxels + sidecar; returns the sidecar path."""
    os.makedirs(out_dir, exist_ok=True)
    base = f"stack_{stack.stack_id:06d}"
    raw_path = os.path.join(out_dir, base + ".f32")
    voxels32 = np.ascontiguousarray(stack.voxels, dtype="<f4")
    voxels32.tofile(raw_path)
    lo, hi = normalization_range(voxels32)
    sidecar = {
        "stack_id": stack.stack_id,
        "dims": list(stack.voxels.shape),
        "label": stack.label,
        "complexity_level": stack.complexity_level,
        "seed": stack.seed,
        "normalization": {"lo": lo, "hi": hi},
        "voxel_file": base + ".f32",
    }
    sidecar_path = os.path.join(out_dir, base + ".json")
    with open(sidecar_path, "w") as f:
        json.dump(sidecar, f, indent=1, sort_keys=True)
    return sidecar_path


def load_stack(sidecar_path: str) -> Stack:
    with open(sidecar_path) as f:
        meta = json.load(f)
    raw_path = os.path.join(os.path.dirname(sidecar_path), meta["voxel_file"])
    voxels = np.fromfile(raw_path, dtype="<f4").reshape(meta["dims"])
    return Stack(voxels=voxels, stack_id=meta["stack_id"], label=meta["label"],
                 complexity_level=meta["complexity_level"], seed=meta["seed"])


def generate_dataset(cfg: GenConfig, n_per_cell: int, levels, out_dir: str,
                     workers: int = 1) -> dict:
    """Generate n_per_cell stacks per (label x level) cell; write a manifest.

    Stack ids enumerate cells in (level, label, index) order so the id
    assignment is independent of execution order.
    """
    cfg.validate()
    if n_per_cell < 1:
        raise ConfigError("n_per_cell must be >= 1")
    levels = sorted(set(int(l) for l in levels))
    for l in levels:
        if not 0 <= l <= 4:
            raise ConfigError(f"levels must be in 0..4, got {l}")
    os.makedirs(out_dir, exist_ok=True)

    jobs = []
    stack_id = 0
    for level in levels:
        for label in (HEALTHY, LESION):
            for _ in range(n_per_cell):
                jobs.append((stack_id, label, level))
                stack_id += 1

    def build(job):
        sid, label, level = job
        stack = make_stack(cfg, sid, label, level)
        path = save_stack(stack, out_dir)
        return {"stack_id": sid, "label": label, "complexity_level": level,
                "seed": cfg.master_seed, "sidecar": os.path.basename(path)}

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(build, jobs))
    else:
        entries = [build(j) for j in jobs]
    entries.sort(key=lambda e: e["stack_id"])

    manifest = {
        "n_per_cell": n_per_cell,
        "levels": levels,
        "dims": list(cfg.dims),
        "master_seed": cfg.master_seed,
        "stacks": entries,
    }
    manifest_path = os.path.join(out_dir, "manifest.json")
    with open(manifest_path, "w") as f:
        json.dump(manifest, f, indent=1, sort_keys=True)
    return manifest


def load_manifest(manifest_path: str) -> dict:
    with open(manifest_path) as f:
        manifest = json.load(f)
    manifest["_dir"] = os.path.dirname(os.path.abspath(manifest_path))
    return manifest


def iter_manifest_stacks(manifest: dict):
    """Yield stacks listed in a manifest, in manifest order."""
    base = manifest["_dir"]
    for entry in manifest["stacks"]:
        yield load_stack(os.path.join(base, entry["sidecar"]))
