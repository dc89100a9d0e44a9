"""Declarative network descriptions, the three bundled presets, and forward inference.

Layer vocabulary follows the reference cost table: convolutions are written
"conv filter_size, stride, number_of_filters", pooling "max pool HxW", dense
layers "fc out_dim". ReLU is implicit after every parametric layer except the
last one (the classifier head feeds average pooling / softmax directly).
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import (
    ContractViolationError,
    ModelIntegrityError,
    ShapeInferenceError,
    UnknownPresetError,
    UnsupportedConfigError,
)
from .kernels import ConvWeights, Tensor

PRESET_NAMES = ("cnn-fc", "cnn-c", "cnn-cnp")

# layer kinds
CONV = "conv"
MAXPOOL = "maxpool"
AVGPOOL_GLOBAL = "avgpool_global"
DENSE = "dense"
FLATTEN = "flatten"
SOFTMAX = "activation_softmax"

Shape = tuple[int, int, int] | int  # feature map or flat vector length


@dataclass(frozen=True)
class LayerSpec:
    kind: str
    kernel_h: int = 0
    kernel_w: int = 0
    stride: int = 1
    out_channels: int = 0
    pool_h: int = 0
    pool_w: int = 0

    def __post_init__(self):
        if self.kind == CONV:
            if self.kernel_h not in (1, 3) or self.kernel_w not in (1, 3):
                raise UnsupportedConfigError(f"conv kernel must be 1 or 3, got {self.kernel_h}x{self.kernel_w}")
            if self.stride not in (1, 2):
                raise UnsupportedConfigError(f"conv stride must be 1 or 2, got {self.stride}")
            if self.out_channels < 1:
                raise UnsupportedConfigError("conv needs out_channels >= 1")
        elif self.kind == MAXPOOL:
            if self.pool_h not in (1, 2) or self.pool_w not in (1, 2):
                raise UnsupportedConfigError(f"pool dims must be 1 or 2, got {self.pool_h}x{self.pool_w}")
        elif self.kind == DENSE:
            if self.out_channels < 1:
                raise UnsupportedConfigError("dense needs out_channels >= 1")
        elif self.kind not in (AVGPOOL_GLOBAL, FLATTEN, SOFTMAX):
            raise UnsupportedConfigError(f"unknown layer kind {self.kind!r}")

    @property
    def is_parametric(self) -> bool:
        return self.kind in (CONV, DENSE)

    def label(self) -> str:
        """Row label in the cost-table vocabulary."""
        if self.kind == CONV:
            return f"conv {self.kernel_h}, {self.stride}, {self.out_channels}"
        if self.kind == MAXPOOL:
            return f"max pool {self.pool_h}x{self.pool_w}"
        if self.kind == AVGPOOL_GLOBAL:
            return "avg pool"
        if self.kind == DENSE:
            return f"fc {self.out_channels}"
        if self.kind == FLATTEN:
            return "flatten"
        return "activation"


def conv(kernel: int, stride: int, filters: int) -> LayerSpec:
    return LayerSpec(CONV, kernel_h=kernel, kernel_w=kernel, stride=stride, out_channels=filters)


def maxpool(pool_h: int, pool_w: int) -> LayerSpec:
    return LayerSpec(MAXPOOL, pool_h=pool_h, pool_w=pool_w)


def dense(out_dim: int) -> LayerSpec:
    return LayerSpec(DENSE, out_channels=out_dim)


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    input_shape: tuple[int, int, int]
    layers: tuple[LayerSpec, ...]
    num_classes: int

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        shapes = infer_shapes(self)
        final = shapes[-1]
        if not isinstance(final, int) or final != self.num_classes:
            raise ShapeInferenceError(
                f"network must end in a vector of {self.num_classes} values, got {final}"
            )


def build_preset(name: str, num_classes: int = 28) -> NetworkSpec:
    """The three bundled architectures over a 400x64x1 log-mel input.

    cnn-fc is an approximate reconstruction (see README); cnn-c and cnn-cnp
    reproduce the reference cost table row for row.
    """
    input_shape = (400, 64, 1)
    if name == "cnn-cnp":
        layers = [
            conv(3, 1, 64),
            conv(3, 2, 64),
            conv(3, 1, 128),
            conv(3, 2, 128),
            conv(3, 1, 128),
            conv(1, 1, 128),
            conv(1, 1, num_classes),
            LayerSpec(AVGPOOL_GLOBAL),
            LayerSpec(SOFTMAX),
        ]
    elif name == "cnn-c":
        layers = [
            conv(3, 1, 64),
            conv(3, 1, 64),
            maxpool(2, 2),
            conv(3, 1, 128),
            conv(3, 1, 128),
            maxpool(2, 2),
            conv(3, 1, 128),
            conv(1, 1, 128),
            conv(1, 1, num_classes),
            LayerSpec(AVGPOOL_GLOBAL),
            LayerSpec(SOFTMAX),
        ]
    elif name == "cnn-fc":
        layers = [
            conv(3, 1, 64),
            conv(3, 1, 64),
            maxpool(1, 2),
            conv(3, 1, 128),
            conv(3, 1, 128),
            maxpool(2, 2),
            LayerSpec(FLATTEN),
            dense(1024),
            dense(1024),
            dense(num_classes),
            LayerSpec(SOFTMAX),
        ]
    else:
        raise UnknownPresetError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return NetworkSpec(name=name, input_shape=input_shape, layers=tuple(layers), num_classes=num_classes)


def infer_shapes(spec: NetworkSpec) -> list[Shape]:
    """Output shape after each layer under same-padding/ceil-division rules."""
    shapes: list[Shape] = []
    cur: Shape = spec.input_shape
    for i, layer in enumerate(spec.layers):
        where = f"layer {i} ({layer.label()})"
        if layer.kind == CONV:
            if not isinstance(cur, tuple):
                raise ShapeInferenceError(f"{where}: conv applied to a flat vector")
            h, w, _ = cur
            if h < layer.stride or w < layer.stride:
                raise ShapeInferenceError(
                    f"{where}: spatial dim would hit 0 (input {h}x{w}, stride {layer.stride})"
                )
            cur = (-(-h // layer.stride), -(-w // layer.stride), layer.out_channels)
        elif layer.kind == MAXPOOL:
            if not isinstance(cur, tuple):
                raise ShapeInferenceError(f"{where}: pool applied to a flat vector")
            h, w, c = cur
            if h % layer.pool_h or w % layer.pool_w:
                raise ShapeInferenceError(
                    f"{where}: input {h}x{w} not divisible by pool {layer.pool_h}x{layer.pool_w}"
                )
            if h < layer.pool_h or w < layer.pool_w:
                raise ShapeInferenceError(f"{where}: spatial dim would hit 0")
            cur = (h // layer.pool_h, w // layer.pool_w, c)
        elif layer.kind == AVGPOOL_GLOBAL:
            if not isinstance(cur, tuple):
                raise ShapeInferenceError(f"{where}: pool applied to a flat vector")
            cur = cur[2]
        elif layer.kind == FLATTEN:
            if not isinstance(cur, tuple):
                raise ShapeInferenceError(f"{where}: flatten applied to a flat vector")
            cur = cur[0] * cur[1] * cur[2]
        elif layer.kind == DENSE:
            if isinstance(cur, tuple):
                raise ShapeInferenceError(f"{where}: dense needs a flat vector; add flatten")
            cur = layer.out_channels
        elif layer.kind == SOFTMAX:
            if isinstance(cur, tuple):
                raise ShapeInferenceError(f"{where}: softmax needs a flat vector")
        shapes.append(cur)
    return shapes


@dataclass(frozen=True)
class DenseWeights:
    """Weights for a fully-connected layer, (out, in) plus bias (out,)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(np.asarray(self.weights, dtype=np.float32))
        b = np.ascontiguousarray(np.asarray(self.bias, dtype=np.float32))
        if w.ndim != 2 or b.shape != (w.shape[0],):
            raise ContractViolationError(f"dense weights {w.shape} / bias {b.shape} mismatch")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class ModelWeights:
    """Per-layer parameters aligned with a NetworkSpec's layer list (None for
    non-parametric layers)."""

    layers: tuple

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))


def init_weights(spec: NetworkSpec, seed: int = 0) -> ModelWeights:
    """Seeded uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights and biases.

    Draw order is fixed (layer by layer, weights then bias) so a given
    (spec, seed) always produces identical values.
    """
    rng = np.random.default_rng(seed)
    shapes = infer_shapes(spec)
    out: list = []
    cur: Shape = spec.input_shape
    for layer, shape in zip(spec.layers, shapes):
        if layer.kind == CONV:
            in_ch = cur[2] if isinstance(cur, tuple) else 0
            fan_in = layer.kernel_h * layer.kernel_w * in_ch
            wshape = (layer.out_channels, layer.kernel_h, layer.kernel_w, in_ch)
            out.append(ConvWeights(_uniform(rng, wshape, fan_in), _uniform(rng, (layer.out_channels,), fan_in)))
        elif layer.kind == DENSE:
            fan_in = int(cur)
            wshape = (layer.out_channels, fan_in)
            out.append(DenseWeights(_uniform(rng, wshape, fan_in), _uniform(rng, (layer.out_channels,), fan_in)))
        else:
            out.append(None)
        cur = shape
    return ModelWeights(tuple(out))


def _uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = np.float32(1.0 / np.sqrt(fan_in))
    r = rng.random(shape, dtype=np.float32)
    r *= 2.0
    r -= 1.0
    r *= bound
    return r


def _check_conv(layer: LayerSpec, w, in_ch: int, where: str) -> ConvWeights:
    if not isinstance(w, ConvWeights):
        raise ModelIntegrityError(f"{where}: expected conv weights, got {type(w).__name__}")
    if (
        w.kernel_h != layer.kernel_h
        or w.kernel_w != layer.kernel_w
        or w.out_channels != layer.out_channels
        or w.in_channels != in_ch
    ):
        raise ModelIntegrityError(
            f"{where}: weights {w.weights.shape} do not match spec "
            f"(kernel {layer.kernel_h}x{layer.kernel_w}, {in_ch}->{layer.out_channels})"
        )
    return w


def forward(spec: NetworkSpec, weights: ModelWeights, x: Tensor) -> np.ndarray:
    """Run the network; returns the class-probability vector.

    Pure function: same spec/weights/input give bitwise-identical output.
    """
    if x.shape != spec.input_shape:
        raise ContractViolationError(f"input shape {x.shape} != spec input {spec.input_shape}")
    if len(weights.layers) != len(spec.layers):
        raise ModelIntegrityError(
            f"weights cover {len(weights.layers)} layers, spec has {len(spec.layers)}"
        )
    param_idx = [i for i, l in enumerate(spec.layers) if l.is_parametric]
    last_param = param_idx[-1] if param_idx else -1
    cur = x
    for i, (layer, w) in enumerate(zip(spec.layers, weights.layers)):
        where = f"layer {i} ({layer.label()})"
        if layer.kind == CONV:
            cw = _check_conv(layer, w, cur.channels, where)
            cur = kernels.conv2d(cur, cw, stride=layer.stride)
            if i != last_param:
                cur = kernels.relu(cur)
        elif layer.kind == MAXPOOL:
            cur = kernels.maxpool(cur, layer.pool_h, layer.pool_w)
        elif layer.kind == AVGPOOL_GLOBAL:
            cur = kernels.global_avg_pool(cur)
        elif layer.kind == FLATTEN:
            cur = cur.data.reshape(-1)  # row-major (h, w, c) order
        elif layer.kind == DENSE:
            if not isinstance(w, DenseWeights):
                raise ModelIntegrityError(f"{where}: expected dense weights")
            if w.in_dim != cur.shape[0] or w.out_dim != layer.out_channels:
                raise ModelIntegrityError(
                    f"{where}: weights {w.weights.shape} do not fit input {cur.shape[0]}"
                )
            cur = kernels.dense(cur, w.weights, w.bias)
            if i != last_param:
                cur = np.maximum(cur, np.float32(0.0))
        elif layer.kind == SOFTMAX:
            cur = kernels.softmax(cur)
    return cur


def classify(probabilities: np.ndarray, labels: list[str]) -> tuple[str, float]:
    """Highest-probability label; ties break to the lowest index."""
    probabilities = np.asarray(probabilities)
    if probabilities.size == 0:
        raise ContractViolationError("empty probability vector")
    if len(labels) != probabilities.size:
        raise ContractViolationError(
            f"{probabilities.size} probabilities but {len(labels)} labels"
        )
    idx = int(np.argmax(probabilities))
    return labels[idx], float(probabilities[idx])
