"""Fixed-range image similarity metrics: PSNR and SSIM.

Both assume inputs already mapped to the [0, 255] dynamic range (see
stacks.normalize_to_range). PSNR uses the range maximum 255, not the
per-image maximum, and is capped at 100 dB so identical images stay
finite. SSIM uses the canonical 11x11 Gaussian window (sigma 1.5) with
k1 = 0.01, k2 = 0.03, averaged over all fully-contained window positions.
"""

import numpy as np
from scipy.ndimage import correlate1d

DATA_RANGE = 255.0
PSNR_CAP = 100.0

_SSIM_RADIUS = 5  # 11-tap window
_SSIM_SIGMA = 1.5
_K1 = 0.01
_K2 = 0.03


def psnr(x: np.ndarray, y: np.ndarray) -> float:
    """20*log10(255) - 10*log10(MSE); 100 dB cap when MSE underflows it."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    mse = np.mean((x - y) ** 2)
    if mse == 0.0:
        return PSNR_CAP
    value = 20.0 * np.log10(DATA_RANGE) - 10.0 * np.log10(mse)
    return float(min(value, PSNR_CAP))


def _ssim_window() -> np.ndarray:
    t = np.arange(-_SSIM_RADIUS, _SSIM_RADIUS + 1, dtype=float)
    w = np.exp(-(t ** 2) / (2.0 * _SSIM_SIGMA ** 2))
    return w / w.sum()


def _windowed_means(img: np.ndarray) -> np.ndarray:
    """Separable Gaussian window applied along the last two axes, cropped
    to window positions fully inside the image."""
    w = _ssim_window()
    out = correlate1d(img, w, axis=-1, mode="constant")
    out = correlate1d(out, w, axis=-2, mode="constant")
    r = _SSIM_RADIUS
    return out[..., r:-r, r:-r]


def _ssim_mean(x: np.ndarray, y: np.ndarray):
    c1 = (_K1 * DATA_RANGE) ** 2
    c2 = (_K2 * DATA_RANGE) ** 2
    mx = _windowed_means(x)
    my = _windowed_means(y)
    sxx = _windowed_means(x * x) - mx * mx
    syy = _windowed_means(y * y) - my * my
    sxy = _windowed_means(x * y) - mx * my
    num = (2.0 * mx * my + c1) * (2.0 * sxy + c2)
    den = (mx * mx + my * my + c1) * (sxx + syy + c2)
    ssim_map = num / den
    return ssim_map.mean(axis=(-2, -1))


def ssim(x: np.ndarray, y: np.ndarray) -> float:
    """Mean structural similarity of two 2-D fields, in [-1, 1]."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if x.ndim != 2:
        raise ValueError("ssim expects 2-D fields")
    if min(x.shape) < 2 * _SSIM_RADIUS + 1:
        raise ValueError("image smaller than the 11x11 SSIM window")
    return float(_ssim_mean(x, y))


def consecutive_slice_metrics(volume: np.ndarray):
    """PSNR and SSIM between each pair of consecutive slices.

    `volume` is an (S, H, W) array already in [0, 255]. Returns two
    length S-1 arrays. Vectorized over pairs; identical to calling
    psnr/ssim per pair.
    """
    v = np.asarray(volume, dtype=float)
    a, b = v[:-1], v[1:]
    mse = np.mean((a - b) ** 2, axis=(1, 2))
    with np.errstate(divide="ignore"):
        p = 20.0 * np.log10(DATA_RANGE) - 10.0 * np.log10(mse)
    p = np.minimum(np.where(mse == 0.0, PSNR_CAP, p), PSNR_CAP)
    s = _ssim_mean(a, b)
    return p, np.asarray(s, dtype=float)
