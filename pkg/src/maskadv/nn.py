"""Minimal feed-forward inference engine with exact reverse-mode input gradients.

Supported layers: dense, conv2d, relu, sigmoid, flatten and residual-add.
Models are immutable after construction; all computation is float64.
Images are laid out (height, width, channels); conv kernels are
(out_channels, in_channels, kh, kw).
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ModelFormatError, NumericError
from .tensorio import tensor_from_payload, tensor_to_payload


@dataclass(frozen=True)
class Dense:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray    # (out,)


@dataclass(frozen=True)
class Conv2D:
    kernel: np.ndarray  # (out, in, kh, kw)
    bias: np.ndarray    # (out,)
    stride: tuple
    padding: tuple


@dataclass(frozen=True)
class ReLU:
    pass


@dataclass(frozen=True)
class Sigmoid:
    pass


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class ResidualAdd:
    # source indexes the activation sequence: 0 is the model input,
    # k is the output of the k-th layer (1-based); must precede this layer.
    source: int


@dataclass(frozen=True)
class NetworkModel:
    layers: tuple
    input_shape: tuple
    input_range: tuple
    num_classes: int


@dataclass(frozen=True)
class Scores:
    values: np.ndarray
    predicted_label: int


_KINDS = {
    Dense: "dense",
    Conv2D: "conv2d",
    ReLU: "relu",
    Sigmoid: "sigmoid",
    Flatten: "flatten",
    ResidualAdd: "residual-add",
}


def _conv_out_hw(h, w, layer):
    kh, kw = layer.kernel.shape[2], layer.kernel.shape[3]
    sh, sw = layer.stride
    ph, pw = layer.padding
    oh = (h + 2 * ph - kh) // sh + 1
    ow = (w + 2 * pw - kw) // sw + 1
    return oh, ow


def activation_shapes(model):
    """Shapes of the activation sequence h_0 (input) .. h_n (scores)."""
    shapes = [tuple(model.input_shape)]
    for pos, layer in enumerate(model.layers, start=1):
        prev = shapes[-1]
        if isinstance(layer, Dense):
            if len(prev) != 1 or prev[0] != layer.weight.shape[1]:
                raise ModelFormatError(
                    f"layer {pos} (dense): expects flat input of size "
                    f"{layer.weight.shape[1]}, got {prev}"
                )
            shapes.append((layer.weight.shape[0],))
        elif isinstance(layer, Conv2D):
            if len(prev) != 3 or prev[2] != layer.kernel.shape[1]:
                raise ModelFormatError(
                    f"layer {pos} (conv2d): expects (h, w, {layer.kernel.shape[1]}) "
                    f"input, got {prev}"
                )
            oh, ow = _conv_out_hw(prev[0], prev[1], layer)
            if oh < 1 or ow < 1:
                raise ModelFormatError(f"layer {pos} (conv2d): kernel larger than input {prev}")
            shapes.append((oh, ow, layer.kernel.shape[0]))
        elif isinstance(layer, (ReLU, Sigmoid)):
            shapes.append(prev)
        elif isinstance(layer, Flatten):
            shapes.append((math.prod(prev),))
        elif isinstance(layer, ResidualAdd):
            if not 0 <= layer.source < pos:
                raise ModelFormatError(
                    f"layer {pos} (residual-add): source {layer.source} must refer to "
                    f"an earlier activation"
                )
            if shapes[layer.source] != prev:
                raise ModelFormatError(
                    f"layer {pos} (residual-add): source shape {shapes[layer.source]} "
                    f"does not match input shape {prev}"
                )
            shapes.append(prev)
        else:
            raise ModelFormatError(f"layer {pos}: unsupported layer object {layer!r}")
    return shapes


def validate_model(model):
    lo, hi = model.input_range
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise ModelFormatError(f"input_range must satisfy lo < hi, got ({lo}, {hi})")
    if model.num_classes < 2:
        raise ModelFormatError(f"num_classes must be at least 2, got {model.num_classes}")
    for pos, layer in enumerate(model.layers, start=1):
        for name in ("weight", "bias", "kernel"):
            arr = getattr(layer, name, None)
            if arr is not None and not np.all(np.isfinite(arr)):
                raise ModelFormatError(f"layer {pos}: non-finite values in {name}")
        if isinstance(layer, Dense) and layer.bias.shape != (layer.weight.shape[0],):
            raise ModelFormatError(f"layer {pos} (dense): bias shape {layer.bias.shape} "
                                   f"does not match weight rows {layer.weight.shape[0]}")
        if isinstance(layer, Conv2D) and layer.bias.shape != (layer.kernel.shape[0],):
            raise ModelFormatError(f"layer {pos} (conv2d): bias shape {layer.bias.shape} "
                                   f"does not match kernel out-channels")
    shapes = activation_shapes(model)
    if shapes[-1] != (model.num_classes,):
        raise ModelFormatError(
            f"final layer produces shape {shapes[-1]}, expected ({model.num_classes},)"
        )
    return shapes


def _conv_patches(layer, x):
    kh, kw = layer.kernel.shape[2], layer.kernel.shape[3]
    sh, sw = layer.stride
    ph, pw = layer.padding
    xp = np.pad(x, ((ph, ph), (pw, pw), (0, 0)))
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(0, 1))
    win = win[::sh, ::sw]  # (oh, ow, c, kh, kw)
    oh, ow = win.shape[0], win.shape[1]
    return win.reshape(oh * ow, -1), oh, ow, xp.shape


def _apply_layer(layer, x, activations):
    if isinstance(layer, Dense):
        return layer.weight @ x + layer.bias
    if isinstance(layer, Conv2D):
        patches, oh, ow, _ = _conv_patches(layer, x)
        wmat = layer.kernel.reshape(layer.kernel.shape[0], -1)
        out = patches @ wmat.T + layer.bias
        return out.reshape(oh, ow, layer.kernel.shape[0])
    if isinstance(layer, ReLU):
        return np.maximum(x, 0.0)
    if isinstance(layer, Sigmoid):
        # split by sign for overflow-free evaluation
        out = np.empty_like(x)
        pos = x >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
        ex = np.exp(x[~pos])
        out[~pos] = ex / (1.0 + ex)
        return out
    if isinstance(layer, Flatten):
        return x.reshape(-1)
    if isinstance(layer, ResidualAdd):
        return x + activations[layer.source]
    raise InputError(f"unsupported layer object {layer!r}")


def forward_trace(model, x):
    """All activations h_0 (input copy) .. h_n (scores) for one input."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != tuple(model.input_shape):
        raise InputError(f"input shape {x.shape} does not match model "
                         f"input_shape {tuple(model.input_shape)}")
    if not np.all(np.isfinite(x)):
        raise InputError("input contains non-finite values")
    activations = [x]
    with np.errstate(over="ignore", invalid="ignore"):
        for pos, layer in enumerate(model.layers, start=1):
            out = _apply_layer(layer, activations[-1], activations)
            if not np.all(np.isfinite(out)):
                kind = _KINDS.get(type(layer), "?")
                raise NumericError(f"non-finite values after layer {pos} ({kind})")
            activations.append(out)
    return activations


def forward(model, x):
    """Class scores and argmax label (ties broken by lowest index)."""
    values = forward_trace(model, x)[-1]
    return Scores(values=values, predicted_label=int(np.argmax(values)))


def _backward(model, activations, seeds):
    """Pull seed cotangents (s, num_classes) back to the input: (s, *input_shape)."""
    n = len(model.layers)
    s = seeds.shape[0]
    grads = [None] * (n + 1)
    grads[n] = seeds.reshape((s,) + activations[n].shape)

    def accumulate(idx, value):
        grads[idx] = value if grads[idx] is None else grads[idx] + value

    for pos in range(n, 0, -1):
        g = grads[pos]
        if g is None:
            continue
        layer = model.layers[pos - 1]
        h_in = activations[pos - 1]
        if isinstance(layer, Dense):
            accumulate(pos - 1, g @ layer.weight)
        elif isinstance(layer, Conv2D):
            _, oh, ow, padded_shape = _conv_patches(layer, h_in)
            wmat = layer.kernel.reshape(layer.kernel.shape[0], -1)
            dpatch = g.reshape(s, oh * ow, -1) @ wmat
            idx = _col2im_index(layer, h_in.shape, padded_shape, oh, ow)
            acc = np.zeros((s, math.prod(padded_shape)))
            np.add.at(acc, (np.arange(s)[:, None, None], idx[None, :, :]), dpatch)
            ph, pw = layer.padding
            hp, wp, c = padded_shape
            dxp = acc.reshape(s, hp, wp, c)
            accumulate(pos - 1, dxp[:, ph:hp - ph, pw:wp - pw, :])
        elif isinstance(layer, ReLU):
            accumulate(pos - 1, g * (h_in > 0))  # subgradient at 0 is 0
        elif isinstance(layer, Sigmoid):
            out = activations[pos]
            accumulate(pos - 1, g * out * (1.0 - out))
        elif isinstance(layer, Flatten):
            accumulate(pos - 1, g.reshape((s,) + h_in.shape))
        elif isinstance(layer, ResidualAdd):
            accumulate(pos - 1, g)
            accumulate(layer.source, g)
    out = grads[0]
    if out is None:
        out = np.zeros((s,) + activations[0].shape)
    return out


def _col2im_index(layer, in_shape, padded_shape, oh, ow):
    kh, kw = layer.kernel.shape[2], layer.kernel.shape[3]
    sh, sw = layer.stride
    hp, wp, c = padded_shape
    iy = (np.arange(oh) * sh)[:, None, None, None, None] + \
        np.arange(kh)[None, None, None, :, None]
    jx = (np.arange(ow) * sw)[None, :, None, None, None] + \
        np.arange(kw)[None, None, None, None, :]
    cc = np.arange(c)[None, None, :, None, None]
    flat = (iy * wp + jx) * c + cc
    return np.broadcast_to(flat, (oh, ow, c, kh, kw)).reshape(oh * ow, c * kh * kw)


def input_jacobian(model, x):
    """d scores / d input, shape (num_classes, *input_shape)."""
    activations = forward_trace(model, x)
    return _backward(model, activations, np.eye(model.num_classes))


def input_gradient(model, x, k):
    """Gradient of the score of class k with respect to the input."""
    if not 0 <= k < model.num_classes:
        raise InputError(f"class index {k} out of range [0, {model.num_classes})")
    activations = forward_trace(model, x)
    seed = np.zeros((1, model.num_classes))
    seed[0, k] = 1.0
    return _backward(model, activations, seed)[0]


def score_diff_gradient(model, x, k, base):
    """Value and input gradient of f_k(x) - f_base(x)."""
    if k == base:
        raise InputError("k and base must differ")
    for idx in (k, base):
        if not 0 <= idx < model.num_classes:
            raise InputError(f"class index {idx} out of range [0, {model.num_classes})")
    activations = forward_trace(model, x)
    value = float(activations[-1][k] - activations[-1][base])
    seed = np.zeros((1, model.num_classes))
    seed[0, k] = 1.0
    seed[0, base] = -1.0
    return value, _backward(model, activations, seed)[0]


def _layer_to_json(layer):
    if isinstance(layer, Dense):
        return {"kind": "dense", "weight": tensor_to_payload(layer.weight),
                "bias": tensor_to_payload(layer.bias)}
    if isinstance(layer, Conv2D):
        return {"kind": "conv2d", "kernel": tensor_to_payload(layer.kernel),
                "bias": tensor_to_payload(layer.bias),
                "stride": list(layer.stride), "padding": list(layer.padding)}
    if isinstance(layer, ResidualAdd):
        return {"kind": "residual-add", "source": layer.source}
    return {"kind": _KINDS[type(layer)]}


def _layer_from_json(obj, pos):
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ModelFormatError(f"layer {pos}: expected an object with a 'kind'")
    kind = obj["kind"]
    try:
        if kind == "dense":
            w = tensor_from_payload(obj["weight"], what=f"layer {pos} (dense) weight")
            b = tensor_from_payload(obj["bias"], what=f"layer {pos} (dense) bias")
            if w.ndim != 2 or b.ndim != 1:
                raise ModelFormatError(f"layer {pos} (dense): weight must be 2-d, bias 1-d")
            return Dense(weight=w, bias=b)
        if kind == "conv2d":
            k = tensor_from_payload(obj["kernel"], what=f"layer {pos} (conv2d) kernel")
            b = tensor_from_payload(obj["bias"], what=f"layer {pos} (conv2d) bias")
            if k.ndim != 4 or b.ndim != 1:
                raise ModelFormatError(f"layer {pos} (conv2d): kernel must be 4-d, bias 1-d")
            stride = tuple(obj.get("stride", [1, 1]))
            padding = tuple(obj.get("padding", [0, 0]))
            if len(stride) != 2 or any(s < 1 for s in stride):
                raise ModelFormatError(f"layer {pos} (conv2d): bad stride {stride}")
            if len(padding) != 2 or any(p < 0 for p in padding):
                raise ModelFormatError(f"layer {pos} (conv2d): bad padding {padding}")
            return Conv2D(kernel=k, bias=b, stride=stride, padding=padding)
        if kind == "relu":
            return ReLU()
        if kind == "sigmoid":
            return Sigmoid()
        if kind == "flatten":
            return Flatten()
        if kind == "residual-add":
            source = obj.get("source")
            if not isinstance(source, int) or source < 0:
                raise ModelFormatError(f"layer {pos} (residual-add): bad source {source!r}")
            return ResidualAdd(source=source)
    except KeyError as exc:
        raise ModelFormatError(f"layer {pos} ({kind}): missing field {exc}") from exc
    raise ModelFormatError(f"layer {pos}: unsupported layer kind {kind!r}")


def save_model(model, path):
    doc = {
        "input_shape": list(model.input_shape),
        "input_range": [float(model.input_range[0]), float(model.input_range[1])],
        "num_classes": model.num_classes,
        "layers": [_layer_to_json(layer) for layer in model.layers],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ModelFormatError(f"{path}: expected a JSON object")
    for key in ("input_shape", "input_range", "num_classes", "layers"):
        if key not in doc:
            raise ModelFormatError(f"{path}: missing field {key!r}")
    shape = doc["input_shape"]
    if not isinstance(shape, list) or any(not isinstance(s, int) or s <= 0 for s in shape):
        raise ModelFormatError(f"{path}: bad input_shape {shape!r}")
    rng = doc["input_range"]
    if not isinstance(rng, list) or len(rng) != 2:
        raise ModelFormatError(f"{path}: bad input_range {rng!r}")
    if not isinstance(doc["num_classes"], int):
        raise ModelFormatError(f"{path}: num_classes must be an integer")
    if not isinstance(doc["layers"], list):
        raise ModelFormatError(f"{path}: layers must be a list")
    layers = tuple(_layer_from_json(obj, pos)
                   for pos, obj in enumerate(doc["layers"], start=1))
    model = NetworkModel(
        layers=layers,
        input_shape=tuple(shape),
        input_range=(float(rng[0]), float(rng[1])),
        num_classes=doc["num_classes"],
    )
    validate_model(model)
    return model
