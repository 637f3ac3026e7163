"""Build the desk-scale digits dataset and classifier used by tests and demos.

Real MNIST is not bundled; instead the 8x8 handwritten digits that ship with
scikit-learn are bilinearly upscaled to 28x28 and written in IDX format, and
a small dense classifier is trained on the training split. Everything is
seeded, so repeated builds are byte-identical. Requires the 'dev' extras
(scikit-learn, scipy).

Run as a script:  python -m maskadv.deskdata OUTDIR
"""

import json
import sys
from pathlib import Path

import numpy as np

from .datasets import save_idx_images, save_idx_labels
from .nn import save_model
from .train import accuracy, init_mlp, train_sgd

TRAIN_COUNT = 1200
HIDDEN = (128, 64)
SEED = 7


def build_digit_images():
    from scipy.ndimage import zoom
    from sklearn.datasets import load_digits

    raw = load_digits()
    images = np.stack([zoom(img / 16.0, 28 / 8, order=1) for img in raw.images])
    return np.clip(images, 0.0, 1.0), raw.target.astype(np.int64)


def build(outdir):
    """Write IDX files and a trained model; returns paths and test accuracy."""
    outdir = Path(outdir)
    data_dir = outdir / "digits"
    model_dir = outdir / "models"
    data_dir.mkdir(parents=True, exist_ok=True)
    model_dir.mkdir(parents=True, exist_ok=True)
    stamp = outdir / "deskdata.json"
    model_path = model_dir / "digits_mlp.json"
    if stamp.exists() and model_path.exists():
        return json.loads(stamp.read_text())

    images, labels = build_digit_images()
    rng = np.random.default_rng(SEED)
    order = rng.permutation(len(images))
    images, labels = images[order], labels[order]
    train_x, test_x = images[:TRAIN_COUNT], images[TRAIN_COUNT:]
    train_y, test_y = labels[:TRAIN_COUNT], labels[TRAIN_COUNT:]

    save_idx_images(data_dir / "train-images-idx3-ubyte", train_x)
    save_idx_labels(data_dir / "train-labels-idx1-ubyte", train_y)
    save_idx_images(data_dir / "t10k-images-idx3-ubyte", test_x)
    save_idx_labels(data_dir / "t10k-labels-idx1-ubyte", test_y)

    model = init_mlp((28, 28, 1), HIDDEN, 10, seed=SEED)
    model = train_sgd(model, train_x, train_y, epochs=40, batch_size=32,
                      lr=0.1, seed=SEED)
    save_model(model, model_path)

    info = {
        "model": str(model_path),
        "dataset": str(data_dir),
        "test_accuracy": accuracy(model, test_x, test_y),
        "train_accuracy": accuracy(model, train_x, train_y),
        "test_count": len(test_x),
    }
    stamp.write_text(json.dumps(info, indent=2))
    return info


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "deskdata"
    print(json.dumps(build(target), indent=2))
