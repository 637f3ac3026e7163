"""Masked multi-class DeepFool with max-norm geometry steps.

Each iteration linearizes the score differences and picks the class whose
approximated hyperplane is closest in max-norm, at distance
|f'_k| / ||w'_k||_1; the raw step is that distance times sign(w'). Under an
unconstrained mask the raw step is applied directly (the classic update).
Inside a tight feasible box part of the step would be clipped away and the
margin would only shrink geometrically without ever crossing, so the attack
applies the box-aware form of the same projection: the step level is raised
by water-filling over the per-element headroom until the surviving step still
meets the full linear margin. Overshoot scales the applied step; the iterate
is then projected into the box. With the adaptive flag the per-element bounds
are multiplied by loosen_rate every loosen_interval iterations (zero bounds
stay zero, so regional masks stay regional).
"""

from dataclasses import dataclass, field

import numpy as np

from .constraints import cap_to_range, clip, feasible_box
from .errors import NumericError
from .nn import forward, forward_trace, _backward

DEGENERATE_GRAD = 1e-12


@dataclass(frozen=True)
class DeepFoolConfig:
    max_iter: int = 50
    overshoot: float = 0.02
    adaptive: bool = False
    loosen_rate: float = 1.2
    loosen_interval: int = 10


@dataclass
class DeepFoolTrace:
    iterations: int = 0
    chosen_classes: list = field(default_factory=list)
    constraint_scale: float = 1.0
    success: bool = False


def _linearize(model, x, original_label):
    """Closest-hyperplane class, its max-norm distance and gradient diff."""
    activations = forward_trace(model, x)
    scores = activations[-1]
    jac = _backward(model, activations, np.eye(model.num_classes))
    jac = jac.reshape(model.num_classes, -1)
    f_diff = scores - scores[original_label]
    w_diff = jac - jac[original_label]
    l1 = np.abs(w_diff).sum(axis=1)
    ratio = np.full(model.num_classes, np.inf)
    usable = l1 >= DEGENERATE_GRAD
    usable[original_label] = False
    ratio[usable] = np.abs(f_diff[usable]) / l1[usable]
    if not usable.any():
        raise NumericError("deepfool_step: all candidate gradients are degenerate "
                           "(flat region)")
    l_hat = int(np.argmin(ratio))
    return l_hat, float(ratio[l_hat]), w_diff[l_hat].reshape(x.shape)


def deepfool_step(model, x, original_label):
    """Closest-hyperplane class and the unconstrained max-norm step towards it."""
    l_hat, distance, w = _linearize(model, x, original_label)
    return l_hat, distance * np.sign(w)


def _box_aware_step(x, distance, w, box):
    """Max-norm-minimal step onto the linearized boundary within the box.

    Raises the common step level t by water-filling: coordinates saturate at
    their headroom, the rest grow until sum(|w_i| * min(t, headroom_i))
    reaches the required margin |f'| = distance * ||w||_1. Falls back to the
    box extreme along sign(w) when the margin is unreachable.
    """
    aw = np.abs(w)
    target = distance * aw.sum()
    head = np.where(w > 0, box.upper - x, np.where(w < 0, x - box.lower, 0.0))
    head = np.maximum(head, 0.0)
    if target <= 0:
        return np.zeros_like(x)
    hmax = head.max()
    if float(np.sum(aw * head)) <= target:
        t = hmax
    else:
        t_lo, t_hi = distance, hmax
        for _ in range(60):
            t_mid = 0.5 * (t_lo + t_hi)
            if float(np.sum(aw * np.minimum(t_mid, head))) < target:
                t_lo = t_mid
            else:
                t_hi = t_mid
        t = t_hi
    return np.sign(w) * np.minimum(t, head)


def deepfool_attack(model, x0, eps, cfg=DeepFoolConfig(), true_label=None):
    """Run the constrained attack from a clean image.

    Returns (adversarial image or None, trace, final bounds). The final
    bounds reflect any adaptive loosening so later phases can reuse the same
    feasible set.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    lo, hi = model.input_range
    eps_cur = cap_to_range(eps, model.input_range).copy()
    label0 = forward(model, x0).predicted_label
    trace = DeepFoolTrace()
    if true_label is not None and label0 != true_label:
        # already misclassified; the zero perturbation is adversarial
        trace.success = True
        return x0.copy(), trace, eps_cur

    x = x0.copy()
    for i in range(cfg.max_iter):
        if forward(model, x).predicted_label != label0:
            break
        l_hat, distance, w = _linearize(model, x, label0)
        trace.chosen_classes.append(l_hat)
        if cfg.adaptive and i > 0 and i % cfg.loosen_interval == 0:
            eps_cur = np.minimum(eps_cur * cfg.loosen_rate, hi - lo)
            trace.constraint_scale *= cfg.loosen_rate
        box = feasible_box(x0, eps_cur, model.input_range)
        delta = _box_aware_step(x, distance, w, box)
        x = clip(x + (1.0 + cfg.overshoot) * delta, box)
        trace.iterations = i + 1

    trace.success = forward(model, x).predicted_label != label0
    return (x if trace.success else None), trace, eps_cur
