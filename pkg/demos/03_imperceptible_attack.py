"""Imperceptible attacks driven by the variance map.

The local standard deviation caps each element's perturbation, so smooth
areas stay untouched. The adaptive variant loosens the bounds during the
search (zero stays zero), trading a little visual fidelity for a much higher
success rate; compare both against the unconstrained attack.
"""

import pathlib

import numpy as np

import maskadv as ma
from maskadv.deskdata import build

HERE = pathlib.Path(__file__).parent
info = build(HERE / "_data")
model = ma.load_model(info["model"])
dataset = ma.ingest_dataset("digits", info["dataset"])

x0, label = dataset[1]
sigma = ma.variance_map(x0)
print(f"variance map: {int((sigma > 0).sum())} of {sigma.size} elements "
      f"attackable, max sigma {sigma.max():.3f}")

rows = []
for name, spec in [
        ("unconstrained", ma.ConstraintSpec(kind="uniform", eps=1.0)),
        ("imperceptible", ma.ConstraintSpec(kind="imperceptible")),
        ("imperceptible-adaptive",
         ma.ConstraintSpec(kind="imperceptible", adaptive=True))]:
    n_ok, ssims, linfs = 0, [], []
    for i in range(20):
        x, y = dataset[i]
        res = ma.run_attack(ma.AttackRequest(model=model, image=x,
                                             constraint=spec, true_label=y))
        if res.success:
            n_ok += 1
            ssims.append(res.ssim)
            linfs.append(res.norms["linf"])
    rows.append((name, n_ok, np.mean(ssims) if ssims else float("nan"),
                 np.mean(linfs) if linfs else float("nan")))

print(f"\n{'attack':24s} {'successes':>9s} {'mean ssim':>10s} {'mean linf':>10s}")
for name, ok, s, l in rows:
    print(f"{name:24s} {ok:>6d}/20 {s:>10.4f} {l:>10.4f}")
print("\nthe variance-constrained attacks keep structural similarity higher; "
      "adaptive loosening recovers most of the lost success rate")
