"""Dataset ingestion: big-endian IDX image/label files (optionally gzipped)
and directories of PNG images with a labels JSON."""

import gzip
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError
from .images import png_to_image

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


@dataclass
class Dataset:
    name: str
    images: np.ndarray  # (n, h, w, c), values in input_range
    labels: np.ndarray  # (n,)
    input_range: tuple = (0.0, 1.0)

    def __len__(self):
        return len(self.images)

    def __getitem__(self, i):
        return self.images[i], int(self.labels[i])


def _read_bytes(path):
    raw = Path(path).read_bytes()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _unpack_u32(raw, offset, path):
    if len(raw) < offset + 4:
        raise DatasetError(f"{path}: truncated header at byte offset {offset}")
    return struct.unpack_from(">I", raw, offset)[0]


def load_idx_images(path):
    raw = _read_bytes(path)
    magic = _unpack_u32(raw, 0, path)
    if magic != IDX_IMAGES_MAGIC:
        raise DatasetError(f"{path}: bad magic 0x{magic:08x} at byte offset 0, "
                           f"expected 0x{IDX_IMAGES_MAGIC:08x}")
    n = _unpack_u32(raw, 4, path)
    h = _unpack_u32(raw, 8, path)
    w = _unpack_u32(raw, 12, path)
    expected = 16 + n * h * w
    if len(raw) < expected:
        raise DatasetError(f"{path}: truncated pixel data at byte offset {len(raw)} "
                           f"(expected {expected} bytes)")
    pixels = np.frombuffer(raw, dtype=np.uint8, count=n * h * w, offset=16)
    return pixels.reshape(n, h, w, 1).astype(np.float64) / 255.0


def load_idx_labels(path):
    raw = _read_bytes(path)
    magic = _unpack_u32(raw, 0, path)
    if magic != IDX_LABELS_MAGIC:
        raise DatasetError(f"{path}: bad magic 0x{magic:08x} at byte offset 0, "
                           f"expected 0x{IDX_LABELS_MAGIC:08x}")
    n = _unpack_u32(raw, 4, path)
    if len(raw) < 8 + n:
        raise DatasetError(f"{path}: truncated label data at byte offset {len(raw)} "
                           f"(expected {8 + n} bytes)")
    return np.frombuffer(raw, dtype=np.uint8, count=n, offset=8).astype(np.int64)


def save_idx_images(path, images):
    """images: (n, h, w) or (n, h, w, 1) floats in [0, 1]."""
    arr = np.asarray(images)
    if arr.ndim == 4:
        arr = arr[:, :, :, 0]
    data = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", IDX_IMAGES_MAGIC, *data.shape))
        fh.write(data.tobytes())


def save_idx_labels(path, labels):
    labels = np.asarray(labels, dtype=np.uint8)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", IDX_LABELS_MAGIC, len(labels)))
        fh.write(labels.tobytes())


def _rescale(unit_images, input_range):
    lo, hi = input_range
    return lo + unit_images * (hi - lo)


def load_idx_dataset(images_path, labels_path, name=None, input_range=(0.0, 1.0)):
    images = load_idx_images(images_path)
    labels = load_idx_labels(labels_path)
    if len(images) != len(labels):
        raise DatasetError(f"{images_path}: {len(images)} images but "
                           f"{len(labels)} labels")
    return Dataset(name=name or Path(images_path).stem,
                   images=_rescale(images, input_range), labels=labels,
                   input_range=tuple(input_range))


def load_png_dataset(directory, name=None, input_range=(0.0, 1.0)):
    directory = Path(directory)
    labels_file = directory / "labels.json"
    if not labels_file.exists():
        raise DatasetError(f"{directory}: missing labels.json")
    try:
        label_map = json.loads(labels_file.read_text())
    except json.JSONDecodeError as exc:
        raise DatasetError(f"{labels_file}: not valid JSON ({exc})") from exc
    files = sorted(directory.glob("*.png"))
    if not files:
        raise DatasetError(f"{directory}: no PNG files")
    images, labels = [], []
    for f in files:
        if f.name not in label_map:
            raise DatasetError(f"{labels_file}: no label for {f.name}")
        images.append(png_to_image(f.read_bytes(), input_range=(0.0, 1.0)))
        labels.append(int(label_map[f.name]))
    stacked = np.stack(images)
    return Dataset(name=name or directory.name,
                   images=_rescale(stacked, input_range),
                   labels=np.asarray(labels, dtype=np.int64),
                   input_range=tuple(input_range))


def ingest_dataset(name, path, input_range=(0.0, 1.0)):
    """Load from a directory holding either IDX pairs (test split preferred)
    or PNGs plus labels.json."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: does not exist")
    if path.is_dir():
        idx_images = sorted(path.glob("*images-idx3-ubyte*"))
        if idx_images:
            preferred = [p for p in idx_images
                         if "t10k" in p.name or "test" in p.name] or idx_images
            images_path = preferred[0]
            labels_path = Path(str(images_path).replace("images-idx3", "labels-idx1"))
            if not labels_path.exists():
                raise DatasetError(f"{path}: found {images_path.name} but no "
                                   f"matching labels file")
            return load_idx_dataset(images_path, labels_path, name=name,
                                    input_range=input_range)
        if (path / "labels.json").exists():
            return load_png_dataset(path, name=name, input_range=input_range)
        raise DatasetError(f"{path}: no IDX files or labels.json found")
    raise DatasetError(f"{path}: expected a dataset directory")
