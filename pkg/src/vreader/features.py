"""Lesion-cue and background-complexity features.

Lesion cues are brightness comparisons against fixed regions of interest
around the stack center:

  f1  center disk (r=3, slice 16) minus surround ring (5 <= r <= 7, slice 16)
  f2  center disk (r=3, slice 16) minus center disk (r=4, slice 15)
  f3  center disk (r=3, slice 16) minus center disk (r=4, slice 17)

Complexity features: b1/b2 are local-variance energies (lesion
neighborhood and whole slice 16); b3/b4 are the 31 consecutive-slice
PSNR/SSIM values, computed on the per-stack [0, 255] normalization.
Slice indices are 1-based throughout, matching the interface documents.
"""

from dataclasses import dataclass

import numpy as np

from .metrics import consecutive_slice_metrics, psnr, ssim  # noqa: F401 (re-export)
from .stacks import LESION_SLICE, Stack, disk_mask, normalize_to_range


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class RoiGeometry:
    lesion_disk_radius: float = 3.0
    surround_inner: float = 5.0
    surround_outer: float = 7.0
    neighbor_disk_radius: float = 4.0
    lesion_slice: int = LESION_SLICE  # 1-based


DEFAULT_ROI = RoiGeometry()


@dataclass(frozen=True)
class LesionFeatures:
    f1: float
    f2: float
    f3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.f1, self.f2, self.f3], dtype=float)


@dataclass(frozen=True)
class ComplexityFeatures:
    b1: float
    b2: float
    b3: np.ndarray  # (S-1,) PSNR in dB
    b4: np.ndarray  # (S-1,) SSIM in [-1, 1]


def ring_mask(h: int, w: int, r_in: float, r_out: float, center=None) -> np.ndarray:
    if center is None:
        center = (h // 2, w // 2)
    yy, xx = np.ogrid[:h, :w]
    d2 = (yy - center[0]) ** 2 + (xx - center[1]) ** 2
    return (d2 >= r_in * r_in) & (d2 <= r_out * r_out)


def region_mean(slice2d: np.ndarray, mask: np.ndarray) -> float:
    """Arithmetic mean over the masked pixels of one slice."""
    if slice2d.shape != mask.shape:
        raise GeometryError("mask does not fit the slice")
    n = int(mask.sum())
    if n == 0:
        raise GeometryError("empty region")
    return float(slice2d[mask].mean())


def _check_dims(voxels: np.ndarray, roi: RoiGeometry):
    s, h, w = voxels.shape
    if s < roi.lesion_slice + 1:
        raise GeometryError(f"need >= {roi.lesion_slice + 1} slices, got {s}")
    r = roi.surround_outer
    cy, cx = h // 2, w // 2
    if cy - r < 0 or cx - r < 0 or cy + r >= h or cx + r >= w:
        raise GeometryError("ROI geometry exceeds slice bounds")


def compute_lesion_features(stack, roi: RoiGeometry = DEFAULT_ROI) -> LesionFeatures:
    voxels = stack.voxels if isinstance(stack, Stack) else np.asarray(stack)
    _check_dims(voxels, roi)
    _, h, w = voxels.shape
    k = roi.lesion_slice - 1  # 0-based lesion slice
    disk3 = disk_mask(h, w, roi.lesion_disk_radius)
    ring = ring_mask(h, w, roi.surround_inner, roi.surround_outer)
    disk4 = disk_mask(h, w, roi.neighbor_disk_radius)
    center = region_mean(voxels[k], disk3)
    f1 = center - region_mean(voxels[k], ring)
    f2 = center - region_mean(voxels[k - 1], disk4)
    f3 = center - region_mean(voxels[k + 1], disk4)
    return LesionFeatures(f1=f1, f2=f2, f3=f3)


def region_energy(stack, scope: str, roi: RoiGeometry = DEFAULT_ROI) -> float:
    """Local variance (mean squared deviation from the regional mean).

    scope "lesion_roi" is the radius-7 center disk on slice 16 (lesion
    plus surround footprint); "whole_slice16" is the full slice.
    """
    voxels = stack.voxels if isinstance(stack, Stack) else np.asarray(stack)
    _check_dims(voxels, roi)
    _, h, w = voxels.shape
    sl = voxels[roi.lesion_slice - 1]
    if scope == "lesion_roi":
        values = sl[disk_mask(h, w, roi.surround_outer)]
    elif scope == "whole_slice16":
        values = sl.ravel()
    else:
        raise ValueError(f"unknown scope {scope!r}")
    return float(np.mean((values - values.mean()) ** 2))


def compute_complexity_features(stack, roi: RoiGeometry = DEFAULT_ROI) -> ComplexityFeatures:
    voxels = stack.voxels if isinstance(stack, Stack) else np.asarray(stack)
    _check_dims(voxels, roi)
    b1 = region_energy(voxels, "lesion_roi", roi)
    b2 = region_energy(voxels, "whole_slice16", roi)
    normalized = normalize_to_range(voxels)
    b3, b4 = consecutive_slice_metrics(normalized)
    return ComplexityFeatures(b1=b1, b2=b2, b3=b3, b4=b4)
