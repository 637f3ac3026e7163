"""The distance and similarity measures used in attack reports.

Norm family on a perturbation, whole-image SSIM, and the perceptual color
difference (CIEDE2000, summed over pixels) on a synthetic RGB pair.
"""

import numpy as np

import maskadv as ma

delta = np.zeros((4, 4))
delta[0, 0], delta[1, 2] = 0.3, -0.4
l0, l1, l2, linf = ma.lp_norms(delta)
print(f"perturbation with two touched pixels: "
      f"l0={l0} l1={l1:.2f} l2={l2:.2f} linf={linf:.2f}")

rng = np.random.default_rng(0)
x = rng.uniform(0, 1, (16, 16, 1))
print(f"ssim(x, x) = {ma.ssim(x, x)}")
noisy = np.clip(x + rng.normal(0, 0.05, x.shape), 0, 1)
print(f"ssim(x, x + noise) = {ma.ssim(x, noisy):.4f}")

rgb = rng.uniform(0, 1, (8, 8, 3))
shifted = np.clip(rgb + np.array([0.05, 0.0, -0.05]), 0, 1)
print(f"ciede2000(identical) = {ma.ciede2000(rgb, rgb)}")
print(f"ciede2000(color shift) = {ma.ciede2000(rgb, shifted):.2f} "
      f"(sum over {rgb.shape[0] * rgb.shape[1]} pixels)")

# the Lab conversion behind the color difference
lab = ma.srgb_to_lab(np.array([[1.0, 1.0, 1.0], [1.0, 0.0, 0.0]]))
print(f"white -> Lab {np.round(lab[0], 2)}, red -> Lab {np.round(lab[1], 2)}")
