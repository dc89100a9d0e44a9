"""Deterministic tensor kernels: convolution, pooling, activations, dense.

All feature maps are rank-3 (height, width, channels) float32 arrays in
row-major order. Every kernel is a pure function; inputs are never mutated
and identical inputs give bitwise-identical outputs. Per-output-element
accumulation always runs over the flattened (kernel_row, kernel_col,
in_channel) axis, which is what makes a 1x1 convolution bit-identical to
`dense` on the same numbers.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .errors import ContractViolationError, UnsupportedConfigError


def _as_f32(a) -> np.ndarray:
    a = np.asarray(a)
    return a if a.dtype == np.float32 else a.astype(np.float32)


@dataclass(frozen=True)
class Tensor:
    """Rank-3 feature map: (height, width, channels), 32-bit floats."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(_as_f32(self.data))
        if arr.ndim != 3:
            raise ContractViolationError(
                f"tensor must be rank-3 (height, width, channels), got rank {arr.ndim}"
            )
        if 0 in arr.shape:
            raise ContractViolationError(f"tensor dims must be positive, got {arr.shape}")
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.data.shape

    def assert_finite(self) -> "Tensor":
        if not np.isfinite(self.data).all():
            raise ContractViolationError("tensor contains NaN/Inf")
        return self


@dataclass(frozen=True)
class ConvWeights:
    """Convolution kernel bank, indexed (out_channel, kernel_h, kernel_w, in_channel)."""

    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(_as_f32(self.weights))
        b = np.ascontiguousarray(_as_f32(self.bias))
        if w.ndim != 4:
            raise ContractViolationError(f"conv weights must be rank-4, got rank {w.ndim}")
        if b.ndim != 1 or b.shape[0] != w.shape[0]:
            raise ContractViolationError(
                f"bias length {b.shape} does not match out_channels {w.shape[0]}"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def kernel_h(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_w(self) -> int:
        return self.weights.shape[2]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[3]


def same_pad_amounts(size: int, kernel: int, stride: int) -> tuple[int, int]:
    """Zero-pad (before, after) for same-padding; the odd column goes after.

    Output size is ceil(size / stride).
    """
    out = -(-size // stride)
    total = max((out - 1) * stride + kernel - size, 0)
    return total // 2, total - total // 2


def conv2d(x: Tensor, w: ConvWeights, stride: int = 1, padding: str = "same") -> Tensor:
    """2-D convolution with same padding; output is ceil(H/s) x ceil(W/s) x out_ch.

    Implemented as im2col + one matrix product. Each output element is the
    dot product of the kernel with its zero-padded input window plus bias,
    accumulated over (kernel_row, kernel_col, in_channel).
    """
    if padding != "same":
        raise UnsupportedConfigError(f"only 'same' padding is supported, got {padding!r}")
    if stride not in (1, 2):
        raise UnsupportedConfigError(f"stride must be 1 or 2, got {stride}")
    if x.channels != w.in_channels:
        raise ContractViolationError(
            f"input has {x.channels} channels but kernel expects {w.in_channels}"
        )
    h, wd, _ = x.shape
    kh, kw = w.kernel_h, w.kernel_w
    out_h, out_w = -(-h // stride), -(-wd // stride)
    (pt, pb), (pl, pr) = same_pad_amounts(h, kh, stride), same_pad_amounts(wd, kw, stride)
    padded = np.pad(x.data, ((pt, pb), (pl, pr), (0, 0)))
    s0, s1, s2 = padded.strides
    windows = as_strided(
        padded,
        shape=(out_h, out_w, kh, kw, w.in_channels),
        strides=(s0 * stride, s1 * stride, s0, s1, s2),
    )
    rows = windows.reshape(out_h * out_w, kh * kw * w.in_channels)  # copies
    kmat = w.weights.reshape(w.out_channels, -1).T  # (K, out), view
    out = rows @ kmat + w.bias
    return Tensor(out.reshape(out_h, out_w, w.out_channels))


def maxpool(x: Tensor, pool_h: int, pool_w: int) -> Tensor:
    """Non-overlapping max pooling. Input dims must divide by the pool dims."""
    if pool_h not in (1, 2) or pool_w not in (1, 2):
        raise UnsupportedConfigError(f"pool dims must be 1 or 2, got {pool_h}x{pool_w}")
    h, wd, c = x.shape
    if h % pool_h or wd % pool_w:
        raise ContractViolationError(
            f"input {h}x{wd} not divisible by pool {pool_h}x{pool_w}"
        )
    v = x.data.reshape(h // pool_h, pool_h, wd // pool_w, pool_w, c)
    return Tensor(v.max(axis=(1, 3)))


def global_avg_pool(x: Tensor) -> np.ndarray:
    """Mean over all spatial positions, one value per channel."""
    return x.data.mean(axis=(0, 1), dtype=np.float32)


def relu(x: Tensor) -> Tensor:
    return Tensor(np.maximum(x.data, np.float32(0.0)))


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax (max-subtracted); returns float64 probabilities."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size == 0:
        raise ContractViolationError("softmax expects a non-empty vector")
    if not np.isfinite(z).all():
        raise ContractViolationError("softmax input must be finite")
    e = np.exp(z - z.max())
    return e / e.sum()


def dense(v: np.ndarray, weights: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map `weights @ v + bias` with weights shaped (out, in).

    Accumulates over the input axis through the same matrix-product path as
    conv2d, so a 1x1 convolution over a 1x1xC tensor matches bitwise.
    """
    v = _as_f32(v)
    weights = _as_f32(weights)
    bias = _as_f32(bias)
    if v.ndim != 1 or weights.ndim != 2 or weights.shape[1] != v.shape[0]:
        raise ContractViolationError(
            f"dense shape mismatch: input {v.shape}, weights {weights.shape}"
        )
    if bias.shape != (weights.shape[0],):
        raise ContractViolationError(
            f"dense bias {bias.shape} does not match out dim {weights.shape[0]}"
        )
    out = v[np.newaxis, :] @ weights.T + bias
    return out[0]
