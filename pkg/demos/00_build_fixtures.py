"""Build the desk-scale digits dataset and classifier every other demo uses.

Writes IDX files plus a trained model under demos/_data and prints the test
accuracy. Safe to re-run; the build is cached and fully seeded.
"""

import json
import pathlib

from maskadv.deskdata import build

HERE = pathlib.Path(__file__).parent

info = build(HERE / "_data")
print(json.dumps(info, indent=2))
print(f"\nmodel: {info['model']}")
print(f"dataset: {info['dataset']} ({info['test_count']} test images)")
print(f"test accuracy: {info['test_accuracy']:.3f}")
