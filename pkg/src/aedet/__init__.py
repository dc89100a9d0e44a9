"""aedet: inference runtime and resource analyzer for small acoustic-event CNNs."""

from .analyzer import (
    CostReport,
    CostRow,
    RealtimeVerdict,
    analyze,
    cnn_fc_reference_report,
    count_macs,
    count_params,
    format_count,
    realtime_check,
    reduction_factors,
)
from .errors import AedetError
from .frontend import (
    FrontendConfig,
    MelFilterbank,
    build_mel_filterbank,
    fft_power_spectrum,
    hamming_window,
    hz_to_mel,
    log_mel_spectrogram,
    mel_to_hz,
)
from .graph import (
    LayerSpec,
    ModelWeights,
    NetworkSpec,
    build_preset,
    classify,
    forward,
    infer_shapes,
    init_weights,
)
from .kernels import (
    ConvWeights,
    Tensor,
    conv2d,
    dense,
    global_avg_pool,
    maxpool,
    relu,
    softmax,
)
from .modelio import dequantize_weights, load_model, quantize_weights, save_model

__version__ = "0.1.0"

__all__ = [
    "AedetError",
    "ConvWeights",
    "CostReport",
    "CostRow",
    "FrontendConfig",
    "LayerSpec",
    "MelFilterbank",
    "ModelWeights",
    "NetworkSpec",
    "RealtimeVerdict",
    "Tensor",
    "analyze",
    "build_mel_filterbank",
    "build_preset",
    "classify",
    "cnn_fc_reference_report",
    "conv2d",
    "count_macs",
    "count_params",
    "dense",
    "dequantize_weights",
    "fft_power_spectrum",
    "format_count",
    "forward",
    "global_avg_pool",
    "hamming_window",
    "hz_to_mel",
    "infer_shapes",
    "init_weights",
    "load_model",
    "log_mel_spectrogram",
    "maxpool",
    "mel_to_hz",
    "quantize_weights",
    "realtime_check",
    "reduction_factors",
    "relu",
    "save_model",
    "softmax",
]
