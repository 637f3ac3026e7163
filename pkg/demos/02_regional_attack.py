"""Regional attacks: restrict the perturbation to a painted region.

Attacks a central window and a far corner at the same budget, then estimates
the robust radius of each region (the smallest max-norm bound that still
admits an adversarial example, with the full value range as the failure
sentinel).
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

for name, corner in (("central", (9, 9)), ("top-left corner", (0, 0))):
    region = np.zeros((28, 28), dtype=int)
    region[corner[0]:corner[0] + 10, corner[1]:corner[1] + 10] = 1
    result = ma.run_attack(ma.AttackRequest(
        model=model, image=x0,
        constraint=ma.ConstraintSpec(kind="region", region=region, eps=0.3),
        true_label=label))
    radius = ma.estimate_robust_radius(model, x0, region, true_label=label)
    status = f"success, max-norm {result.norms['linf']:.4f}" if result.success \
        else "failed"
    print(f"{name:16s} window: attack at eps=0.3 {status}; "
          f"estimated robust radius {radius:.4f}")

    if result.success:
        outside = region == 0
        frozen = bool(np.array_equal(result.adversarial[outside], x0[outside]))
        print(f"{'':16s}  pixels outside the region untouched: {frozen}")
