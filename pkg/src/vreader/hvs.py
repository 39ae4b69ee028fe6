"""Band-pass viewing-stage surrogate.

Stands in for a full perceptual simulation chain with the one property the
rest of the workbench relies on: a difference-of-Gaussians spatial filter
followed by temporal smoothing that removes DC exactly, attenuates very
low and high frequencies, and never amplifies (unit-sum kernels), so
information available downstream can only shrink.
"""

from dataclasses import dataclass, replace

from scipy.ndimage import gaussian_filter

from .stacks import Stack


class HvsConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HvsConfig:
    center_sigma: float = 1.0
    surround_sigma: float = 4.0
    temporal_sigma: float = 0.5
    enabled: bool = True

    def validate(self):
        if self.center_sigma < 0:
            raise HvsConfigError("center_sigma must be >= 0")
        if not self.surround_sigma > self.center_sigma:
            raise HvsConfigError("surround_sigma must exceed center_sigma")
        if self.temporal_sigma < 0:
            raise HvsConfigError("temporal_sigma must be >= 0")


def _smooth(voxels, temporal, spatial):
    if temporal == 0 and spatial == 0:
        return voxels
    return gaussian_filter(voxels, sigma=(temporal, spatial, spatial), mode="wrap")


def apply_hvs(stack: Stack, cfg: HvsConfig) -> Stack:
    """Center-minus-surround response with temporal smoothing; mean ~ 0."""
    cfg.validate()
    if not cfg.enabled:
        return replace(stack, voxels=stack.voxels.copy(), post_hvs=True)
    v = stack.voxels.astype(float)
    center = _smooth(v, 0.0, cfg.center_sigma)
    surround = _smooth(v, 0.0, cfg.surround_sigma)
    out = _smooth(center - surround, cfg.temporal_sigma, 0.0)
    return replace(stack, voxels=out, post_hvs=True)
