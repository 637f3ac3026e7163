"""Mask-constraints: per-element perturbation bounds and the feasible boxes they induce.

A mask-constraint is an array of non-negative bounds with the same shape as
the image; bound 0 freezes an element. A binary region mask has the image's
spatial shape and is broadcast across channels.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError


@dataclass(frozen=True)
class FeasibleBox:
    lower: np.ndarray
    upper: np.ndarray


def _check_same_shape(a, b, what):
    if a.shape != b.shape:
        raise InputError(f"{what}: shape {a.shape} does not match {b.shape}")


def feasible_box(x0, eps, input_range):
    """Elementwise interval [max(lo, x0-eps), min(hi, x0+eps)]."""
    x0 = np.asarray(x0, dtype=np.float64)
    eps = np.asarray(eps, dtype=np.float64)
    _check_same_shape(eps, x0, "feasible_box")
    if np.any(eps < 0):
        raise InputError("feasible_box: negative bounds")
    lo, hi = input_range
    return FeasibleBox(lower=np.maximum(lo, x0 - eps), upper=np.minimum(hi, x0 + eps))


def clip(x, box):
    """Project x into the box (elementwise median of lower, x, upper)."""
    x = np.asarray(x, dtype=np.float64)
    _check_same_shape(x, box.lower, "clip")
    return np.clip(x, box.lower, box.upper)


def uniform_mask(image_shape, eps):
    if eps < 0:
        raise InputError(f"uniform_mask: eps must be non-negative, got {eps}")
    return np.full(tuple(image_shape), float(eps))


def region_to_mask(region, eps, image_shape):
    """eps where the region is 1, 0 elsewhere, broadcast across channels."""
    if eps < 0:
        raise InputError(f"region_to_mask: eps must be non-negative, got {eps}")
    region = np.asarray(region)
    image_shape = tuple(image_shape)
    if not np.all(np.isin(region, (0, 1))):
        raise InputError("region_to_mask: region must be binary")
    if region.shape == image_shape:
        omega = region
    elif len(image_shape) == 3 and region.shape == image_shape[:2]:
        omega = np.broadcast_to(region[:, :, None], image_shape)
    else:
        raise InputError(f"region_to_mask: region shape {region.shape} does not "
                         f"match image shape {image_shape}")
    return np.where(omega == 1, float(eps), 0.0)


def ratio_to_mask(x0, importance, ratio, eps):
    """Unmask the n highest-importance pixels; n = floor(ratio*d) for ratio<1,
    round(ratio) otherwise. Ties go to the lowest pixel index."""
    x0 = np.asarray(x0, dtype=np.float64)
    importance = np.asarray(importance, dtype=np.float64)
    spatial = x0.shape[:2] if x0.ndim == 3 else x0.shape
    if importance.shape != spatial:
        raise InputError(f"ratio_to_mask: importance shape {importance.shape} does "
                         f"not match image spatial shape {spatial}")
    if ratio <= 0:
        raise InputError(f"ratio_to_mask: ratio must be positive, got {ratio}")
    d = math.prod(spatial)
    n = int(ratio * d) if ratio < 1 else int(math.floor(ratio + 0.5))
    if n == 0:
        raise InputError(f"ratio_to_mask: ratio {ratio} selects zero pixels")
    if n > d:
        raise InputError(f"ratio_to_mask: ratio {ratio} selects {n} pixels, "
                         f"image has {d}")
    order = np.argsort(-importance.ravel(), kind="stable")
    omega = np.zeros(d, dtype=np.int64)
    omega[order[:n]] = 1
    return region_to_mask(omega.reshape(spatial), eps, x0.shape)


def cap_to_range(eps, input_range):
    """Bounds beyond the value range cannot enlarge the feasible box."""
    lo, hi = input_range
    return np.minimum(np.asarray(eps, dtype=np.float64), hi - lo)


def attackable_pixels(eps):
    """Number of pixels with any nonzero bound (channels collapsed)."""
    eps = np.asarray(eps)
    nz = eps > 0
    if eps.ndim == 3:
        nz = nz.any(axis=2)
    return int(nz.sum())
