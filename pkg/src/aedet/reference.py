"""Brute-force reference kernels.

Plain nested-loop implementations, kept deliberately independent of the
vectorized kernels in aedet.kernels: no shared math, no shortcuts. They are
slow and meant for small shapes only. `MacCounter` counts every multiply
that physically happens, which is what the cost-model agreement check
compares against the analyzer's closed forms.
"""

import numpy as np

from .errors import ContractViolationError, UnsupportedConfigError
from .kernels import ConvWeights, Tensor, same_pad_amounts


class MacCounter:
    """Tallies multiply-accumulate operations as they are executed."""

    def __init__(self):
        self.macs = 0

    def add(self, n: int = 1):
        self.macs += n


def conv2d_reference(
    x: Tensor, w: ConvWeights, stride: int = 1, counter: MacCounter | None = None
) -> Tensor:
    """Six-nested-loop convolution with same padding (extra pad after)."""
    if stride not in (1, 2):
        raise UnsupportedConfigError(f"stride must be 1 or 2, got {stride}")
    if x.channels != w.in_channels:
        raise ContractViolationError("channel mismatch")
    h, wd, _ = x.shape
    kh, kw = w.kernel_h, w.kernel_w
    out_h, out_w = -(-h // stride), -(-wd // stride)
    pad_top = same_pad_amounts(h, kh, stride)[0]
    pad_left = same_pad_amounts(wd, kw, stride)[0]
    out = np.zeros((out_h, out_w, w.out_channels), dtype=np.float64)
    for oy in range(out_h):
        for ox in range(out_w):
            for oc in range(w.out_channels):
                acc = 0.0
                for ky in range(kh):
                    for kx in range(kw):
                        iy = oy * stride + ky - pad_top
                        ix = ox * stride + kx - pad_left
                        for ic in range(w.in_channels):
                            v = 0.0
                            if 0 <= iy < h and 0 <= ix < wd:
                                v = float(x.data[iy, ix, ic])
                            acc += v * float(w.weights[oc, ky, kx, ic])
                            if counter is not None:
                                counter.add()
                out[oy, ox, oc] = acc + float(w.bias[oc])
    return Tensor(out)


def dense_reference(
    v: np.ndarray, weights: np.ndarray, bias: np.ndarray, counter: MacCounter | None = None
) -> np.ndarray:
    """Loop-based affine map, weights shaped (out, in)."""
    out = np.zeros(weights.shape[0], dtype=np.float64)
    for o in range(weights.shape[0]):
        acc = 0.0
        for i in range(v.shape[0]):
            acc += float(v[i]) * float(weights[o, i])
            if counter is not None:
                counter.add()
        out[o] = acc + float(bias[o])
    return out
