"""Variance maps for imperceptibility and corrected importance maps.

The variance map is the per-channel population standard deviation over the
3-pixel window (both immediate neighbours plus the pixel) along each spatial
axis, taking the elementwise minimum of the two axes; border pixels use the
one-sided window shifted inward. Importance maps are integrated gradients
averaged under Gaussian input noise, aggregated per pixel, and weighted by a
correction coefficient 0.5 + min(x, 1-x) that discounts pixels whose
perturbations would clip at the value-range boundary.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .nn import forward, input_gradient


@dataclass(frozen=True)
class ImportanceMap:
    importance: np.ndarray  # per pixel, channels aggregated
    beta: np.ndarray        # per-pixel correction coefficient in [0.5, 1]

    def weighted(self):
        return self.beta * self.importance


@dataclass(frozen=True)
class RegionScore:
    row: int
    col: int
    height: int
    width: int
    score: float
    robust_radius: float = None

    def region_mask(self, image_height, image_width):
        omega = np.zeros((image_height, image_width), dtype=np.int64)
        omega[self.row:self.row + self.height, self.col:self.col + self.width] = 1
        return omega


def _axis_sigma(x, axis):
    n = x.shape[axis]
    if n < 3:
        raise InputError(f"variance_map: axis {axis} has {n} pixels, needs at least 3")
    windows = np.lib.stride_tricks.sliding_window_view(x, 3, axis=axis)
    sig = np.sqrt(windows.var(axis=-1))
    starts = np.clip(np.arange(n) - 1, 0, n - 3)
    return np.take(sig, starts, axis=axis)


def variance_map(x):
    """Per-element minimum of the two axis-aligned 3-pixel window deviations."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (2, 3):
        raise InputError(f"variance_map: expected a 2-d or 3-d image, got {x.ndim}-d")
    return np.minimum(_axis_sigma(x, 0), _axis_sigma(x, 1))


def imperceptible_mask(x):
    """Perturbation bounds equal to the local standard deviation."""
    return variance_map(x)


def integrated_gradients(model, x, baseline=None, k=None, m=64):
    """Path-integral attribution along the line from baseline to x,
    approximated with m right-endpoint gradient samples."""
    x = np.asarray(x, dtype=np.float64)
    if m < 1:
        raise InputError(f"integrated_gradients: m must be at least 1, got {m}")
    if baseline is None:
        baseline = np.full_like(x, model.input_range[0])
    else:
        baseline = np.asarray(baseline, dtype=np.float64)
        if baseline.shape != x.shape:
            raise InputError(f"integrated_gradients: baseline shape {baseline.shape} "
                             f"does not match input shape {x.shape}")
    if k is None:
        k = forward(model, x).predicted_label
    diff = x - baseline
    total = np.zeros_like(x)
    for j in range(1, m + 1):
        total += input_gradient(model, baseline + (j / m) * diff, k)
    return diff * (total / m)


def correction_coefficients(x, input_range):
    """Per-pixel 0.5 + min(x, 1-x) on values normalized to [0, 1]
    (channel values averaged)."""
    x = np.asarray(x, dtype=np.float64)
    lo, hi = input_range
    xn = (x - lo) / (hi - lo)
    beta = 0.5 + np.minimum(xn, 1.0 - xn)
    return beta.mean(axis=2) if x.ndim == 3 else beta


def smoothgrad(model, x, baseline=None, k=None, m=64, n=8, sigma=None, seed=0):
    """Importance map: integrated gradients averaged over n noisy copies of x.

    Noise is Gaussian with the given standard deviation (default one tenth of
    the value range); sample i is seeded as (seed, i) so results are
    reproducible regardless of evaluation order. Channel attributions are
    aggregated per pixel by summing absolute values.
    """
    x = np.asarray(x, dtype=np.float64)
    if n < 1:
        raise InputError(f"smoothgrad: n must be at least 1, got {n}")
    lo, hi = model.input_range
    if sigma is None:
        sigma = 0.1 * (hi - lo)
    if sigma < 0:
        raise InputError(f"smoothgrad: sigma must be non-negative, got {sigma}")
    if k is None:
        k = forward(model, x).predicted_label
    acc = np.zeros_like(x)
    for i in range(n):
        sample = x
        if sigma > 0:
            rng = np.random.default_rng((seed, i))
            sample = x + rng.normal(0.0, sigma, size=x.shape)
        acc += integrated_gradients(model, sample, baseline, k, m)
    attr = acc / n
    imp = np.abs(attr).sum(axis=2) if attr.ndim == 3 else np.abs(attr)
    return ImportanceMap(importance=imp, beta=correction_coefficients(x, model.input_range))


def region_vulnerability(imp, omega):
    """Sum of corrected importance over the region."""
    omega = np.asarray(omega)
    if omega.shape != imp.importance.shape:
        raise InputError(f"region_vulnerability: region shape {omega.shape} does not "
                         f"match map shape {imp.importance.shape}")
    return float(np.sum(imp.weighted() * omega))


def _window_sums(weighted, h, w):
    hh, ww = weighted.shape
    if h > hh or w > ww:
        raise InputError(f"window {h}x{w} larger than map {hh}x{ww}")
    p = np.zeros((hh + 1, ww + 1))
    p[1:, 1:] = weighted.cumsum(axis=0).cumsum(axis=1)
    return p[h:, w:] - p[:-h, w:] - p[h:, :-w] + p[:-h, :-w]


def best_rectangle(imp, h, w):
    """Exact argmax placement of an h x w window over the corrected map,
    ties broken by smallest (row, col)."""
    weighted = imp.weighted()
    sums = _window_sums(weighted, h, w)
    vmax = sums.max()
    tol = 1e-9 * max(1.0, abs(vmax))
    row, col = np.argwhere(sums >= vmax - tol)[0]
    score = float(weighted[row:row + h, col:col + w].sum())
    return RegionScore(row=int(row), col=int(col), height=h, width=w, score=score)


def topk_rectangles(imp, h, w, k):
    """k highest-scoring window placements, each with a distinct corner."""
    if k < 1:
        raise InputError(f"topk_rectangles: k must be at least 1, got {k}")
    weighted = imp.weighted()
    sums = _window_sums(weighted, h, w)
    total = sums.size
    if k > total:
        warnings.warn(f"topk_rectangles: k={k} exceeds {total} placements, clamping",
                      RuntimeWarning, stacklevel=2)
        k = total
    order = np.argsort(-sums.ravel(), kind="stable")[:k]
    rows, cols = np.unravel_index(order, sums.shape)
    return [RegionScore(row=int(r), col=int(c), height=h, width=w,
                        score=float(weighted[r:r + h, c:c + w].sum()))
            for r, c in zip(rows, cols)]
