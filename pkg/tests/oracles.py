"""Independent oracles used across the test suite.

These stay deliberately naive: direct summation, no FFT tricks, no shared
code with the implementations they check.
"""

import numpy as np


def naive_dft(frame) -> np.ndarray:
    """O(N^2) DFT by direct summation."""
    frame = np.asarray(frame, dtype=np.float64)
    n = frame.shape[0]
    k = np.arange(n)
    basis = np.exp(-2j * np.pi * np.outer(k, k) / n)
    return basis @ frame


def naive_power_spectrum(frame) -> np.ndarray:
    spec = naive_dft(frame)[: len(frame) // 2 + 1]
    return np.abs(spec) ** 2


def dot_oracle(v, weights, bias) -> np.ndarray:
    """Python-loop affine map for dense checks, weights (out, in)."""
    out = []
    for o in range(weights.shape[0]):
        acc = 0.0
        for i in range(len(v)):
            acc += float(v[i]) * float(weights[o, i])
        out.append(acc + float(bias[o]))
    return np.array(out)
