import pathlib
import sys

import numpy as np
import pytest

import maskadv as ma
from maskadv.deskdata import build

ARTIFACTS = pathlib.Path(__file__).parent / "_artifacts"


@pytest.fixture(scope="session")
def deskdata():
    """Desk-scale digits dataset + trained classifier, built once and cached."""
    return build(ARTIFACTS)


@pytest.fixture(scope="session")
def desk_model(deskdata):
    return ma.load_model(deskdata["model"])


@pytest.fixture(scope="session")
def desk_dataset(deskdata, desk_model):
    return ma.ingest_dataset("digits", deskdata["dataset"],
                             input_range=desk_model.input_range)


@pytest.fixture(scope="session")
def correct_indices(desk_model, desk_dataset):
    """Indices of test images the desk model classifies correctly, in order."""
    picked = []
    for i in range(len(desk_dataset)):
        x, y = desk_dataset[i]
        if ma.forward(desk_model, x).predicted_label == y:
            picked.append(i)
    return picked
