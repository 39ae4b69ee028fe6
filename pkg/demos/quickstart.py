"""Minimal tour: make a few stacks, look at the features.

Generates one healthy/lesion pair at each end of the complexity range,
pushes them through the viewing-stage filter, and prints the lesion cues
and complexity summaries side by side.
"""

import numpy as np

from vreader import (GenConfig, HvsConfig, apply_hvs,
                     compute_complexity_features, compute_lesion_features,
                     make_stack)

cfg = GenConfig()
hvs = HvsConfig()

print(f"dims={cfg.dims}, lesion amplitude={cfg.lesion_amplitude}, "
      f"base sigma={cfg.base_noise_sigma}")
print()
print(f"{'level':>5} {'label':>8} | {'f1':>7} {'f2':>7} {'f3':>7} | "
      f"{'b1':>7} {'b2':>7} {'mean b3':>8} {'mean b4':>8}")

for level in (0, 4):
    for label in ("healthy", "lesion"):
        stack = make_stack(cfg, stack_id=level * 10 + (label == "lesion"),
                           label=label, level=level)
        viewed = apply_hvs(stack, hvs)
        lf = compute_lesion_features(viewed)
        cf = compute_complexity_features(viewed)
        print(f"{level:>5} {label:>8} | {lf.f1:>7.3f} {lf.f2:>7.3f} "
              f"{lf.f3:>7.3f} | {cf.b1:>7.2f} {cf.b2:>7.2f} "
              f"{np.mean(cf.b3):>8.2f} {np.mean(cf.b4):>8.4f}")

print()
print("note how the lesion shifts the cues f1-f3 upward (attenuated by the")
print("viewing stage), while complexity barely moves b1/b2 (band-pass")
print("filtered away) but clearly lowers the consecutive-slice PSNR (b3).")
