"""Unconstrained max-norm attack on one image, end to end.

Shows the two phases separately: the preliminary boundary-crossing search,
then the boundary walk that shrinks the perturbation. Saves the clean image,
the adversarial image and the |delta| heat map next to this script.
"""

import pathlib

import numpy as np

import maskadv as ma
from maskadv.deskdata import build

HERE = pathlib.Path(__file__).parent
info = build(HERE / "_data")
model = ma.load_model(info["model"])
dataset = ma.ingest_dataset("digits", info["dataset"])

x0, label = dataset[0]
print(f"image 0: true label {label}, "
      f"prediction {ma.forward(model, x0).predicted_label}")

# phase 1: cross the decision boundary under the (trivial) mask
eps = ma.uniform_mask(x0.shape, 1.0)
x_prelim, trace, eps_final = ma.deepfool_attack(model, x0, eps, true_label=label)
d_prelim = float(np.max(np.abs(x_prelim - x0)))
print(f"preliminary: {trace.iterations} iterations, "
      f"now labeled {ma.forward(model, x_prelim).predicted_label}, "
      f"max-norm {d_prelim:.5f}")

# phase 2: walk the boundary to shrink the max-norm
x_final, bb_trace = ma.bb_optimize(model, x0, x_prelim, eps_final)
d_final = float(np.max(np.abs(x_final - x0)))
print(f"optimized: {bb_trace.steps} steps, {bb_trace.improvements} improvements, "
      f"max-norm {d_final:.5f}")

# or do both in one call and get the full metric report
result = ma.run_attack(ma.AttackRequest(
    model=model, image=x0,
    constraint=ma.ConstraintSpec(kind="uniform", eps=1.0), true_label=label))
print(f"pipeline: success={result.success} norms={result.norms} "
      f"ssim={result.ssim:.4f}")

out = HERE / "_out_whole"
out.mkdir(exist_ok=True)
(out / "clean.png").write_bytes(ma.images.image_to_png(x0))
(out / "adversarial.png").write_bytes(ma.images.image_to_png(result.adversarial))
(out / "delta.png").write_bytes(ma.images.heatmap_to_png(result.perturbation))
print(f"images written to {out}/")
