"""Plain minibatch-SGD training of small dense classifiers.

Exists to produce desk-scale test fixtures and demo models. Only stacks of
flatten / dense / relu layers are supported; everything runs batched in
float64.
"""

import math

import numpy as np

from .errors import InputError
from .nn import Dense, Flatten, NetworkModel, ReLU, validate_model


def init_mlp(input_shape, hidden, num_classes, input_range=(0.0, 1.0), seed=0):
    """He-initialized MLP: flatten, then dense/relu pairs, then a dense head."""
    rng = np.random.default_rng(seed)
    sizes = [math.prod(input_shape)] + list(hidden) + [num_classes]
    layers = [Flatten()] if len(input_shape) > 1 else []
    for i in range(len(sizes) - 1):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        w = rng.normal(0.0, math.sqrt(2.0 / fan_in), size=(fan_out, fan_in))
        layers.append(Dense(weight=w, bias=np.zeros(fan_out)))
        if i < len(sizes) - 2:
            layers.append(ReLU())
    model = NetworkModel(layers=tuple(layers), input_shape=tuple(input_shape),
                         input_range=tuple(input_range), num_classes=num_classes)
    validate_model(model)
    return model


def _split_dense(model):
    dense = []
    for layer in model.layers:
        if isinstance(layer, Dense):
            dense.append(layer)
        elif not isinstance(layer, (Flatten, ReLU)):
            raise InputError("trainer supports flatten/dense/relu stacks only")
    return dense


def _batched_scores(weights, biases, xb):
    a = xb
    for i, (w, b) in enumerate(zip(weights, biases)):
        a = a @ w.T + b
        if i < len(weights) - 1:
            a = np.maximum(a, 0.0)
    return a


def train_sgd(model, images, labels, *, epochs=30, batch_size=32, lr=0.1, seed=0):
    """Cross-entropy SGD; returns a new model with trained weights."""
    dense = _split_dense(model)
    weights = [l.weight.copy() for l in dense]
    biases = [l.bias.copy() for l in dense]
    x = np.asarray(images, dtype=np.float64).reshape(len(images), -1)
    y = np.asarray(labels, dtype=np.int64)
    k = model.num_classes
    rng = np.random.default_rng(seed)
    n = len(x)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            xb, yb = x[idx], y[idx]
            acts = [xb]
            pre = []
            a = xb
            for i, (w, b) in enumerate(zip(weights, biases)):
                z = a @ w.T + b
                pre.append(z)
                a = np.maximum(z, 0.0) if i < len(weights) - 1 else z
                acts.append(a)
            z = acts[-1] - acts[-1].max(axis=1, keepdims=True)
            p = np.exp(z)
            p /= p.sum(axis=1, keepdims=True)
            g = p
            g[np.arange(len(idx)), yb] -= 1.0
            g /= len(idx)
            for i in range(len(weights) - 1, -1, -1):
                gw = g.T @ acts[i]
                gb = g.sum(axis=0)
                if i > 0:
                    g = (g @ weights[i]) * (pre[i - 1] > 0)
                weights[i] -= lr * gw
                biases[i] -= lr * gb
    new_layers = []
    it = iter(zip(weights, biases))
    for layer in model.layers:
        if isinstance(layer, Dense):
            w, b = next(it)
            new_layers.append(Dense(weight=w, bias=b))
        else:
            new_layers.append(layer)
    return NetworkModel(layers=tuple(new_layers), input_shape=model.input_shape,
                        input_range=model.input_range, num_classes=model.num_classes)


def accuracy(model, images, labels):
    dense = _split_dense(model)
    weights = [l.weight for l in dense]
    biases = [l.bias for l in dense]
    x = np.asarray(images, dtype=np.float64).reshape(len(images), -1)
    scores = _batched_scores(weights, biases, x)
    return float(np.mean(scores.argmax(axis=1) == np.asarray(labels)))
