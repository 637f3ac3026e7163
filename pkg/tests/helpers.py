"""Shared test utilities: random model generators and independent oracles."""

import numpy as np

import maskadv as ma


def random_dense_net(rng, in_dim=None, classes=None, depth=None, activation="relu"):
    in_dim = in_dim or int(rng.integers(3, 12))
    classes = classes or int(rng.integers(2, 6))
    depth = depth if depth is not None else int(rng.integers(1, 4))
    widths = [in_dim] + [int(rng.integers(4, 16)) for _ in range(depth)] + [classes]
    layers = []
    for i in range(len(widths) - 1):
        w = rng.normal(0, 0.8, (widths[i + 1], widths[i]))
        b = rng.normal(0, 0.3, widths[i + 1])
        layers.append(ma.Dense(weight=w, bias=b))
        if i < len(widths) - 2:
            layers.append(ma.ReLU() if activation == "relu" else ma.Sigmoid())
    return ma.NetworkModel(layers=tuple(layers), input_shape=(in_dim,),
                           input_range=(0.0, 1.0), num_classes=classes)


def random_conv_net(rng, activation="relu"):
    h = int(rng.integers(5, 9))
    cin = int(rng.integers(1, 3))
    cout = int(rng.integers(2, 5))
    classes = int(rng.integers(2, 5))
    act = ma.ReLU() if activation == "relu" else ma.Sigmoid()
    conv = ma.Conv2D(kernel=rng.normal(0, 0.5, (cout, cin, 3, 3)),
                     bias=rng.normal(0, 0.1, cout), stride=(1, 1), padding=(1, 1))
    flat = cout * h * h
    layers = (conv, act, ma.Flatten(),
              ma.Dense(weight=rng.normal(0, 0.4, (classes, flat)),
                       bias=rng.normal(0, 0.1, classes)))
    return ma.NetworkModel(layers=layers, input_shape=(h, h, cin),
                           input_range=(0.0, 1.0), num_classes=classes)


def random_affine_net(rng, in_dim=6, classes=4, input_range=(-10.0, 10.0)):
    w = rng.normal(0, 1.0, (classes, in_dim))
    b = rng.normal(0, 0.5, classes)
    return ma.NetworkModel(layers=(ma.Dense(weight=w, bias=b),),
                           input_shape=(in_dim,), input_range=input_range,
                           num_classes=classes)


def finite_difference_gradient(model, x, k, h=1e-4):
    """Central differences of the class-k score, the independent oracle."""
    fd = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += h
        xm[idx] -= h
        fd[idx] = (ma.forward(model, xp).values[k]
                   - ma.forward(model, xm).values[k]) / (2 * h)
    return fd


def near_relu_boundary(model, x, tol=1e-6):
    """True when any relu pre-activation sits within tol of its kink."""
    activations = ma.forward_trace(model, x)
    for pos, layer in enumerate(model.layers, start=1):
        if isinstance(layer, ma.ReLU):
            if np.any(np.abs(activations[pos - 1]) < tol):
                return True
    return False


def affine_closest_linf_point(model, x0):
    """Enumerate all hyperplanes of an affine model; return the max-norm
    projection onto the closest one (the analytic oracle)."""
    dense = model.layers[0]
    w_all, b_all = dense.weight, dense.bias
    scores = w_all @ x0 + b_all
    y0 = int(np.argmax(scores))
    best = None
    for k in range(model.num_classes):
        if k == y0:
            continue
        w = w_all[k] - w_all[y0]
        f = scores[k] - scores[y0]
        denom = np.abs(w).sum()
        if denom < 1e-12:
            continue
        dist = abs(f) / denom
        if best is None or dist < best[0]:
            best = (dist, x0 + dist * np.sign(w))
    return best


def _slice_search(x0, x_cur, b, c, lo, up, r, pivot, free, axes):
    """Grid the equality hyperplane over the free coordinates; the pivot
    coordinate is solved exactly, so every candidate satisfies b.d = c."""
    if free:
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    else:
        pts = np.zeros((1, 0))
    deltas = np.zeros((len(pts), len(lo)))
    deltas[:, free] = pts
    deltas[:, pivot] = (c - pts @ b[free]) / b[pivot]
    ok = np.all(deltas >= lo - 1e-12, axis=1)
    ok &= np.all(deltas <= up + 1e-12, axis=1)
    ok &= np.einsum("nd,nd->n", deltas, deltas) <= r + 1e-12
    if not ok.any():
        return None
    kept = deltas[ok]
    objs = np.max(np.abs(x0 - (x_cur + kept)), axis=1)
    best = int(np.argmin(objs))
    return float(objs[best]), kept[best]


def grid_subproblem_oracle(x0, x_cur, b, c, box, r, step, refinements=2):
    """Grid search on the feasible set of the boundary-tracking step (small
    dims only), with local refinement around the optimum (the problem is
    convex, so refinement is sound). Returns the best objective or None."""
    dims = x0.size
    pivot = int(np.argmax(np.abs(b)))
    free = [i for i in range(dims) if i != pivot]
    lo = box.lower - x_cur
    up = box.upper - x_cur
    axes = [np.arange(lo[i], up[i] + step / 2, step) for i in free]
    best = _slice_search(x0, x_cur, b, c, lo, up, r, pivot, free, axes)
    if best is None:
        return None
    cur = step
    for _ in range(refinements):
        fine = cur / 10
        delta = best[1]
        axes = [np.arange(max(lo[i], delta[i] - 1.5 * cur),
                          min(up[i], delta[i] + 1.5 * cur) + fine / 2, fine)
                for i in free]
        cand = _slice_search(x0, x_cur, b, c, lo, up, r, pivot, free, axes)
        if cand is not None and cand[0] < best[0]:
            best = cand
        cur = fine
    return best[0]
