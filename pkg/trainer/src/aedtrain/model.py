"""Torch mirror of the runtime's conv-only architecture.

Built directly from the runtime's NetworkSpec so layer geometry can never
drift. Padding reproduces the runtime's same-padding rule exactly: output
ceil(dim/stride), zero padding with the odd row/column after.

Training-time batch norm sits after every conv except the head; it exists
purely to make ADAM-at-defaults converge quickly on raw log-mel inputs and
is folded into the conv weights at export, so the deployed network is the
plain conv stack the runtime describes.
"""

import torch
import torch.nn.functional as F
from aedet.graph import NetworkSpec, build_preset
from torch import nn


def _same_pad(x: torch.Tensor, kh: int, kw: int, stride: int) -> torch.Tensor:
    h, w = x.shape[-2], x.shape[-1]
    out_h, out_w = -(-h // stride), -(-w // stride)
    pad_h = max((out_h - 1) * stride + kh - h, 0)
    pad_w = max((out_w - 1) * stride + kw - w, 0)
    return F.pad(x, (pad_w // 2, pad_w - pad_w // 2, pad_h // 2, pad_h - pad_h // 2))


class ConvClassifier(nn.Module):
    """Conv stack + global average pooling, returning logits."""

    def __init__(self, spec: NetworkSpec, batch_norm: bool = True):
        super().__init__()
        if any(l.kind in ("dense", "flatten") for l in spec.layers):
            raise ValueError("only the conv-only architectures are supported here")
        self.spec = spec
        self.batch_norm = batch_norm
        conv_layers = [l for l in spec.layers if l.kind == "conv"]
        if any(l.kind == "maxpool" for l in spec.layers):
            raise ValueError("pooling variants are not wired into this trainer")
        convs, norms = [], []
        in_ch = spec.input_shape[2]
        self.conv_meta = []
        last = len(conv_layers) - 1
        for i, layer in enumerate(conv_layers):
            hidden = i != last
            convs.append(
                nn.Conv2d(
                    in_ch,
                    layer.out_channels,
                    (layer.kernel_h, layer.kernel_w),
                    bias=not (batch_norm and hidden),  # BN supplies the offset
                )
            )
            norms.append(nn.BatchNorm2d(layer.out_channels) if batch_norm and hidden else nn.Identity())
            self.conv_meta.append((layer.kernel_h, layer.kernel_w, layer.stride))
            in_ch = layer.out_channels
        self.convs = nn.ModuleList(convs)
        self.norms = nn.ModuleList(norms)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """x: (batch, 1, frames, mels) raw log-mel values -> (batch, classes) logits."""
        last = len(self.convs) - 1
        for i, (conv, norm, (kh, kw, stride)) in enumerate(zip(self.convs, self.norms, self.conv_meta)):
            x = _same_pad(x, kh, kw, stride)
            x = F.conv2d(x, conv.weight, conv.bias, stride=stride)
            if i != last:
                x = F.relu(norm(x))
        return x.mean(dim=(2, 3))

    @torch.no_grad()
    def predict_proba(self, x: torch.Tensor) -> torch.Tensor:
        return F.softmax(self.forward(x), dim=1)


def build_model(arch: str = "cnn-cnp", num_classes: int = 6, seed: int = 0,
                batch_norm: bool = True) -> ConvClassifier:
    torch.manual_seed(seed)
    return ConvClassifier(build_preset(arch, num_classes=num_classes), batch_norm=batch_norm)


def mels_to_batch(grids) -> torch.Tensor:
    """(N, frames, mels) float32 -> NCHW torch batch."""
    t = torch.as_tensor(grids)
    if t.dim() == 2:
        t = t.unsqueeze(0)
    return t.unsqueeze(1)
