"""Tensor serialization: JSON documents with a shape and a flat row-major data list."""

import json
import math

import numpy as np

from .errors import ModelFormatError


def tensor_to_payload(arr):
    arr = np.asarray(arr, dtype=np.float64)
    return {"shape": list(arr.shape), "data": [float(v) for v in arr.ravel()]}


def tensor_from_payload(obj, *, what="tensor"):
    if not isinstance(obj, dict) or "shape" not in obj or "data" not in obj:
        raise ModelFormatError(f"{what}: expected an object with 'shape' and 'data'")
    shape = obj["shape"]
    if not isinstance(shape, list) or any(not isinstance(s, int) or s <= 0 for s in shape):
        raise ModelFormatError(f"{what}: shape must be a list of positive integers")
    data = obj["data"]
    expected = math.prod(shape)
    if not isinstance(data, list) or len(data) != expected:
        raise ModelFormatError(
            f"{what}: data length {len(data) if isinstance(data, list) else '?'} "
            f"does not match shape {shape} (expected {expected})"
        )
    arr = np.asarray(data, dtype=np.float64).reshape(shape)
    if not np.all(np.isfinite(arr)):
        raise ModelFormatError(f"{what}: contains non-finite values")
    return arr


def save_tensor(path, arr):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(tensor_to_payload(arr), fh)


def load_tensor(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    return tensor_from_payload(obj, what=str(path))
