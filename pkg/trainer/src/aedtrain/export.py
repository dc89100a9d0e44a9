"""Export trained torch weights into the runtime's AEDM container.

Training-time batch norm is folded into the preceding conv here (using the
running statistics, i.e. eval-mode behavior), so the exported file is a
plain conv stack: w' = w * g / sqrt(var + eps), b' = (b - mean) * g /
sqrt(var + eps) + beta. The fold is exact in float32; padding is unaffected
because normalization applies to conv outputs.
"""

import numpy as np
import torch
from aedet.frontend import FrontendConfig
from aedet.graph import ConvWeights, ModelWeights
from aedet.modelio import save_model
from torch import nn

from .model import ConvClassifier


class ExportError(ValueError):
    pass


def _folded_conv(conv: nn.Conv2d, norm) -> tuple[np.ndarray, np.ndarray]:
    w = conv.weight.detach()
    b = conv.bias.detach() if conv.bias is not None else torch.zeros(w.shape[0])
    if isinstance(norm, nn.BatchNorm2d):
        scale = norm.weight.detach() / torch.sqrt(norm.running_var.detach() + norm.eps)
        w = w * scale[:, None, None, None]
        b = (b - norm.running_mean.detach()) * scale + norm.bias.detach()
    return w.numpy(), b.numpy()


def to_runtime_weights(model: ConvClassifier) -> ModelWeights:
    """Fold norms and reorder torch conv tensors (out,in,kh,kw) -> (out,kh,kw,in)."""
    spec = model.spec
    per_layer: list = []
    conv_idx = 0
    for i, layer in enumerate(spec.layers):
        if layer.kind != "conv":
            per_layer.append(None)
            continue
        w, b = _folded_conv(model.convs[conv_idx], model.norms[conv_idx])
        conv_idx += 1
        if w.shape[0] != layer.out_channels or w.shape[2:] != (layer.kernel_h, layer.kernel_w):
            raise ExportError(
                f"layer {i} ({layer.label()}): torch weight {tuple(w.shape)} does not match spec"
            )
        per_layer.append(ConvWeights(np.ascontiguousarray(w.transpose(0, 2, 3, 1)), b.copy()))
    return ModelWeights(tuple(per_layer))


def export_model(model: ConvClassifier, labels, path, frontend_cfg: FrontendConfig | None = None) -> None:
    """Write the AEDM file the primary runtime loads; quantizes to binary16."""
    if len(labels) != model.spec.num_classes:
        raise ExportError(f"{len(labels)} labels for {model.spec.num_classes} classes")
    save_model(model.spec, to_runtime_weights(model), frontend_cfg or FrontendConfig(), list(labels), path)


def load_runtime_weights_back(model: ConvClassifier, weights: ModelWeights) -> None:
    """Push runtime (e.g. quantize-roundtripped) weights into a fold-free model.

    Only meaningful for batch_norm=False models: folded parameters cannot be
    un-folded into (conv, norm) pairs.
    """
    if model.batch_norm:
        raise ExportError("cannot load folded weights into a batch-norm model")
    conv_iter = iter(model.convs)
    for layer, w in zip(model.spec.layers, weights.layers):
        if layer.kind != "conv":
            continue
        conv = next(conv_iter)
        with torch.no_grad():
            conv.weight.copy_(torch.from_numpy(w.weights.transpose(0, 3, 1, 2).copy()))
            conv.bias.copy_(torch.from_numpy(w.bias.copy()))
