"""PNG helpers: images scaled from the model's value range, binary region
masks (white = attackable), and grayscale heat maps."""

import io

import numpy as np
from PIL import Image

from .errors import InputError


def _to_uint8(x, input_range):
    lo, hi = input_range
    v = (np.asarray(x, dtype=np.float64) - lo) / (hi - lo)
    return np.clip(np.rint(v * 255.0), 0, 255).astype(np.uint8)


def image_to_png(x, input_range=(0.0, 1.0)):
    x = np.asarray(x)
    arr = _to_uint8(x, input_range)
    if arr.ndim == 3 and arr.shape[-1] == 1:
        arr = arr[:, :, 0]
    if arr.ndim == 2:
        img = Image.fromarray(arr, mode="L")
    elif arr.ndim == 3 and arr.shape[-1] == 3:
        img = Image.fromarray(arr, mode="RGB")
    else:
        raise InputError(f"image_to_png: unsupported shape {x.shape}")
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


def png_to_image(data, input_range=(0.0, 1.0)):
    img = Image.open(io.BytesIO(data))
    if img.mode not in ("L", "RGB"):
        img = img.convert("RGB" if img.mode in ("RGBA", "P") else "L")
    arr = np.asarray(img, dtype=np.float64) / 255.0
    if arr.ndim == 2:
        arr = arr[:, :, None]
    lo, hi = input_range
    return lo + arr * (hi - lo)


def mask_to_png(omega):
    omega = np.asarray(omega)
    if not np.all(np.isin(omega, (0, 1))):
        raise InputError("mask_to_png: mask must be binary")
    return image_to_png((omega * 255).astype(np.uint8), input_range=(0.0, 255.0))


def png_to_mask(data):
    img = Image.open(io.BytesIO(data)).convert("L")
    arr = np.asarray(img)
    return (arr >= 128).astype(np.int64)


def heatmap_to_png(values):
    """Grayscale map of |values| normalized to the maximum magnitude."""
    mag = np.abs(np.asarray(values, dtype=np.float64))
    if mag.ndim == 3:
        mag = mag.max(axis=2)
    peak = mag.max()
    if peak > 0:
        mag = mag / peak
    return image_to_png(mag, input_range=(0.0, 1.0))
