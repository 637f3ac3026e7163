"""Boundary-walk minimization of the max-norm perturbation.

Starting from any adversarial point, a short binary search first moves it
onto the decision boundary. Each subsequent step linearizes the class margin
(log-softmax of the original class minus the best other class), then solves

    min ||x0 - (x_cur + d)||_inf
    s.t. x_cur + d in box,  b.d = c,  ||d||_2^2 <= r

where b is the margin gradient and c the distance back to the boundary. The
trust radius r decays on a fixed schedule. The best adversarial iterate seen
is returned, so the result never regresses below the starting point.

The subproblem is solved by bisecting the max-norm level t: for fixed t the
box shrinks to per-element intervals, and feasibility reduces to the minimum
Euclidean norm on the slice {b.d = c} of those intervals, found by a
monotone one-dimensional dual (per-element clamped closed form). When the
equality constraint is unreachable, the step tracks the boundary best-effort
by minimizing |b.d - c| inside box and trust region.
"""

from dataclasses import dataclass, field

import numpy as np

from .constraints import cap_to_range, clip, feasible_box
from .errors import InputError, SolverError
from .nn import forward, forward_trace, _backward

_ZERO_GRAD = 1e-15
_EQ_SLACK = 1e-9


@dataclass(frozen=True)
class BBConfig:
    steps: int = 100
    binary_search_steps: int = 10
    trust_radius: float = 1.0
    decay_interval: int = 20
    decay_factor: float = 0.5


@dataclass(frozen=True)
class BoundaryState:
    iterate: np.ndarray
    margin: float       # min_k (ls_label0 - ls_k), negative while adversarial
    normal: np.ndarray  # gradient of the margin


@dataclass
class BBTrace:
    steps: int = 0
    improvements: int = 0
    best_linf: list = field(default_factory=list)


def _log_softmax(values):
    shifted = values - values.max()
    return shifted - np.log(np.exp(shifted).sum())


def boundary_state(model, x, original_label):
    """Margin to the decision boundary and its input gradient at x."""
    activations = forward_trace(model, x)
    ls = _log_softmax(activations[-1])
    diffs = ls[original_label] - ls
    diffs[original_label] = np.inf
    k_star = int(np.argmin(diffs))
    seed = np.zeros((1, model.num_classes))
    seed[0, original_label] = 1.0
    seed[0, k_star] = -1.0
    normal = _backward(model, activations, seed)[0]
    return BoundaryState(iterate=x, margin=float(diffs[k_star]), normal=normal)


def boundary_search(model, x0, x_adv, box, steps=10):
    """Bisect the segment [x0, x_adv], keeping the adversarial endpoint."""
    x0 = np.asarray(x0, dtype=np.float64)
    x_adv = np.asarray(x_adv, dtype=np.float64)
    label0 = forward(model, x0).predicted_label
    if forward(model, x_adv).predicted_label == label0:
        raise InputError("boundary_search: starting point is not adversarial")
    lo, hi = x0, x_adv
    for _ in range(steps):
        mid = clip(0.5 * (lo + hi), box)
        if forward(model, mid).predicted_label != label0:
            hi = mid
        else:
            lo = mid
    return hi


def _dual_delta(b, lower, upper, mu):
    return np.clip(mu * b, lower, upper)


def _solve_equality_slice(b, lower, upper, c):
    """Minimum-norm d with lower <= d <= upper and b.d = c, or None."""
    # b_i * clip(mu*b_i, lo_i, up_i) == clip(mu*b_i^2, min(..), max(..)),
    # so g(mu) = b.d(mu) is piecewise linear and non-decreasing.
    w = b * b
    p = np.minimum(b * lower, b * upper)
    q = np.maximum(b * lower, b * upper)
    g_min, g_max = p.sum(), q.sum()
    if c < g_min - _EQ_SLACK or c > g_max + _EQ_SLACK:
        return None
    active = w > _ZERO_GRAD
    if not active.any():
        if abs(c) > _EQ_SLACK:
            return None
        return np.clip(0.0, lower, upper)
    knots_lo = np.min(np.minimum(p[active] / w[active], q[active] / w[active]))
    knots_hi = np.max(np.maximum(p[active] / w[active], q[active] / w[active]))
    mu_lo, mu_hi = min(knots_lo, 0.0), max(knots_hi, 0.0)
    for _ in range(48):
        mu = 0.5 * (mu_lo + mu_hi)
        if np.sum(np.clip(w * mu, p, q)) < c:
            mu_lo = mu
        else:
            mu_hi = mu
    return _dual_delta(b, lower, upper, 0.5 * (mu_lo + mu_hi))


def _extreme_delta(b, lower, upper, r):
    """Maximize b.d over the interval box intersected with ||d||^2 <= r."""
    at_box = np.where(b > 0, upper, np.where(b < 0, lower, np.clip(0.0, lower, upper)))
    if np.sum(at_box * at_box) <= r:
        return at_box
    mu_lo, mu_hi = 0.0, 1.0
    norm2 = lambda mu: np.sum(_dual_delta(b, lower, upper, mu) ** 2)
    while norm2(mu_hi) < r and mu_hi < 1e18:
        mu_hi *= 2.0
    for _ in range(64):
        mu = 0.5 * (mu_lo + mu_hi)
        if norm2(mu) <= r:
            mu_lo = mu
        else:
            mu_hi = mu
    return _dual_delta(b, lower, upper, mu_lo)


def solve_linf_subproblem(x0, x_cur, b, c, box, r):
    """Optimal step d for the boundary-tracking subproblem (see module docs)."""
    if r <= 0:
        raise InputError(f"trust radius must be positive, got {r}")
    shape = np.asarray(x_cur).shape
    x0f = np.asarray(x0, dtype=np.float64).ravel()
    xcf = np.asarray(x_cur, dtype=np.float64).ravel()
    bf = np.asarray(b, dtype=np.float64).ravel()
    box_lo = box.lower.ravel() - xcf
    box_up = box.upper.ravel() - xcf
    if np.all(np.abs(bf) < _ZERO_GRAD) and abs(c) > _EQ_SLACK:
        raise SolverError("boundary normal is zero but the boundary distance is not")

    diff = x0f - xcf

    def try_level(t):
        lo_t = np.maximum(box_lo, diff - t)
        up_t = np.minimum(box_up, diff + t)
        if np.any(lo_t > up_t):
            return None
        d = _solve_equality_slice(bf, lo_t, up_t, c)
        if d is None or np.sum(d * d) > r + _EQ_SLACK:
            return None
        return d

    t_box = float(np.max(np.maximum(np.abs(diff - box_lo), np.abs(diff - box_up))))
    best = try_level(t_box)
    if best is None:
        # equality unreachable inside box and trust region: track best-effort
        d_hi = _extreme_delta(bf, box_lo, box_up, r)
        d_lo = _extreme_delta(-bf, box_lo, box_up, r)
        d = d_hi if c > float(bf @ d_hi) else d_lo
        return d.reshape(shape)
    t_lo, t_hi = 0.0, t_box
    while t_hi - t_lo > 1e-7 * max(1.0, t_box):
        t_mid = 0.5 * (t_lo + t_hi)
        d = try_level(t_mid)
        if d is None:
            t_lo = t_mid
        else:
            t_hi = t_mid
            best = d
    return best.reshape(shape)


def bb_optimize(model, x0, x_start, eps, cfg=BBConfig()):
    """Walk the boundary from an adversarial start, shrinking the max-norm.

    Returns (best adversarial iterate, trace); the best max-norm distance is
    tracked each step and never exceeds the starting distance.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    x_start = np.asarray(x_start, dtype=np.float64)
    label0 = forward(model, x0).predicted_label
    if forward(model, x_start).predicted_label == label0:
        raise InputError("bb_optimize: starting point is not adversarial")
    box = feasible_box(x0, cap_to_range(eps, model.input_range), model.input_range)
    x = boundary_search(model, x0, x_start, box, cfg.binary_search_steps)
    best = x
    best_d = float(np.max(np.abs(x - x0)))
    trace = BBTrace()
    r = cfg.trust_radius
    for i in range(cfg.steps):
        if i > 0 and i % cfg.decay_interval == 0:
            r *= cfg.decay_factor
        state = boundary_state(model, x, label0)
        try:
            delta = solve_linf_subproblem(x0, x, state.normal, -state.margin, box, r)
        except SolverError:
            break
        x = clip(x + delta, box)
        trace.steps = i + 1
        if forward(model, x).predicted_label != label0:
            d = float(np.max(np.abs(x - x0)))
            if d < best_d:
                best, best_d = x.copy(), d
                trace.improvements += 1
        trace.best_linf.append(best_d)
    return best, trace
