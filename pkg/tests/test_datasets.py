import gzip
import json
import struct

import numpy as np
import pytest

import maskadv as ma
from maskadv.datasets import (load_idx_images, load_idx_labels,
                              save_idx_images, save_idx_labels)
from maskadv.errors import DatasetError
from maskadv.images import image_to_png


def test_idx_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    images = rng.uniform(0, 1, (7, 5, 4))
    labels = rng.integers(0, 10, 7)
    save_idx_images(tmp_path / "imgs", images)
    save_idx_labels(tmp_path / "labs", labels)
    back = load_idx_images(tmp_path / "imgs")
    assert back.shape == (7, 5, 4, 1)
    assert np.max(np.abs(back[:, :, :, 0] - images)) <= 0.5 / 255
    assert np.array_equal(load_idx_labels(tmp_path / "labs"), labels)


def test_idx_gzip_transparent(tmp_path):
    rng = np.random.default_rng(1)
    images = rng.uniform(0, 1, (3, 4, 4))
    save_idx_images(tmp_path / "imgs", images)
    gz = tmp_path / "imgs.gz"
    gz.write_bytes(gzip.compress((tmp_path / "imgs").read_bytes()))
    assert np.array_equal(load_idx_images(gz), load_idx_images(tmp_path / "imgs"))


def test_idx_bad_magic(tmp_path):
    path = tmp_path / "imgs"
    path.write_bytes(struct.pack(">IIII", 0xdeadbeef, 1, 2, 2) + b"\x00" * 4)
    with pytest.raises(DatasetError, match="bad magic 0xdeadbeef at byte offset 0"):
        load_idx_images(path)
    with pytest.raises(DatasetError, match="bad magic"):
        load_idx_labels(path)


def test_idx_truncated(tmp_path):
    path = tmp_path / "imgs"
    path.write_bytes(struct.pack(">IIII", 0x803, 10, 28, 28) + b"\x00" * 100)
    with pytest.raises(DatasetError, match="truncated"):
        load_idx_images(path)
    short = tmp_path / "short"
    short.write_bytes(b"\x00\x00")
    with pytest.raises(DatasetError, match="truncated header"):
        load_idx_images(short)


def test_ingest_idx_dataset_prefers_test_split(tmp_path, deskdata):
    ds = ma.ingest_dataset("digits", deskdata["dataset"])
    assert len(ds) == deskdata["test_count"]
    assert ds.images.shape[1:] == (28, 28, 1)
    assert ds.images.min() >= 0.0 and ds.images.max() <= 1.0


def test_ingest_rescales_to_input_range(deskdata):
    ds = ma.ingest_dataset("digits", deskdata["dataset"], input_range=(-1.0, 1.0))
    assert ds.images.min() >= -1.0
    assert ds.images.max() <= 1.0
    assert ds.images.min() < 0.0


def test_png_dataset(tmp_path):
    rng = np.random.default_rng(2)
    labels = {}
    for i in range(3):
        img = rng.uniform(0, 1, (6, 6, 1))
        (tmp_path / f"img{i}.png").write_bytes(image_to_png(img))
        labels[f"img{i}.png"] = i
    (tmp_path / "labels.json").write_text(json.dumps(labels))
    ds = ma.ingest_dataset("tiny", tmp_path)
    assert len(ds) == 3
    assert ds.images.shape == (3, 6, 6, 1)
    assert [ds[i][1] for i in range(3)] == [0, 1, 2]


def test_png_dataset_missing_label(tmp_path):
    (tmp_path / "img0.png").write_bytes(image_to_png(np.zeros((4, 4, 1))))
    (tmp_path / "labels.json").write_text("{}")
    with pytest.raises(DatasetError, match="no label"):
        ma.ingest_dataset("tiny", tmp_path)


def test_ingest_unknown_layout(tmp_path):
    (tmp_path / "whatever.txt").write_text("hi")
    with pytest.raises(DatasetError, match="no IDX files"):
        ma.ingest_dataset("x", tmp_path)
    with pytest.raises(DatasetError, match="does not exist"):
        ma.ingest_dataset("x", tmp_path / "missing")
