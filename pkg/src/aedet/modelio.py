"""AEDM model container: network description + 16-bit weights + frontend config.

Byte layout, little-endian throughout (see docs/aedm-format.md for an
annotated hex dump):

    'AEDM' | version u16
    frontend: sample_rate u32 | window_ms f64 | hop_ms f64 | fft_size u32 |
              num_mels u32 | num_frames u32 | fmin f64 | fmax f64 | log_eps f64
    network:  name_len u16 + utf8 | num_classes u32 | input h,w,c u32 x3 |
              layer_count u32 | per layer: kind u8, kernel_h u8, kernel_w u8,
              stride u8, pool_h u8, pool_w u8, reserved u16, out_channels u32
    labels:   count u32 | per label: len u16 + utf8
    weights:  blob_len u64 | IEEE binary16 values, layer by layer in spec
              order, weights then bias (conv indexed out,kh,kw,in; fc out,in)
    crc32 u32 over every preceding byte

Weights are stored in binary16 and dequantized to float32 once at load; all
arithmetic stays in float32. Saving is atomic (temp file + rename) and fully
deterministic: identical inputs give identical bytes.
"""

import os
import struct
import zlib

import numpy as np

from .errors import (
    BadMagicError,
    BadVersionError,
    ChecksumMismatchError,
    ModelFormatError,
    QuantizationOverflowError,
    WeightShapeError,
)
from .frontend import FrontendConfig
from .graph import (
    AVGPOOL_GLOBAL,
    CONV,
    DENSE,
    FLATTEN,
    MAXPOOL,
    SOFTMAX,
    ConvWeights,
    DenseWeights,
    LayerSpec,
    ModelWeights,
    NetworkSpec,
    infer_shapes,
)

MAGIC = b"AEDM"
FORMAT_VERSION = 1

FLOAT16_MAX = 65504.0

_KIND_CODES = {CONV: 0, MAXPOOL: 1, AVGPOOL_GLOBAL: 2, DENSE: 3, FLATTEN: 4, SOFTMAX: 5}
_CODE_KINDS = {v: k for k, v in _KIND_CODES.items()}


def quantize_weights(values: np.ndarray, context: str = "weights") -> np.ndarray:
    """float32 -> binary16 with round-to-nearest-even; overflow is an error."""
    values = np.asarray(values)
    if not np.isfinite(values).all():
        raise QuantizationOverflowError(f"{context}: non-finite values cannot be quantized")
    if np.abs(values).max(initial=0.0) > FLOAT16_MAX:
        raise QuantizationOverflowError(
            f"{context}: magnitude {np.abs(values).max():g} exceeds binary16 max {FLOAT16_MAX}"
        )
    q = values.astype(np.float16)
    if not np.isfinite(q).all():  # values between 65504 and the f16 rounding edge
        raise QuantizationOverflowError(f"{context}: value rounds to infinity in binary16")
    return q


def dequantize_weights(values: np.ndarray) -> np.ndarray:
    return np.asarray(values, dtype=np.float16).astype(np.float32)


def weight_blob_bytes(spec: NetworkSpec) -> int:
    """Stored size of the 16-bit blob: 2 bytes per conv/dense parameter."""
    total = 0
    cur = spec.input_shape
    for layer, shape in zip(spec.layers, infer_shapes(spec)):
        if layer.kind == CONV:
            total += (layer.kernel_h * layer.kernel_w * cur[2] + 1) * layer.out_channels
        elif layer.kind == DENSE:
            total += (int(cur) + 1) * layer.out_channels
        cur = shape
    return 2 * total


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ModelFormatError("string field too long")
    return struct.pack("<H", len(raw)) + raw


class _Reader:
    def __init__(self, buf: bytes, pos: int = 0):
        self.buf = buf
        self.pos = pos

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.buf):
            raise ModelFormatError("file ends mid-field")
        out = struct.unpack_from(fmt, self.buf, self.pos)
        self.pos += size
        return out if len(out) > 1 else out[0]

    def take_bytes(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise ModelFormatError("file ends mid-field")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def take_str(self) -> str:
        n = self.take("<H")
        return self.take_bytes(n).decode("utf-8")


def _serialize(spec: NetworkSpec, weights: ModelWeights, cfg: FrontendConfig, labels) -> bytes:
    if len(labels) != spec.num_classes:
        raise WeightShapeError(f"{len(labels)} labels for {spec.num_classes} classes")
    if len(weights.layers) != len(spec.layers):
        raise WeightShapeError("weights do not cover every layer")
    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", FORMAT_VERSION)
    out += struct.pack(
        "<IddIIIddd",
        cfg.sample_rate,
        cfg.window_ms,
        cfg.hop_ms,
        cfg.fft_size,
        cfg.num_mels,
        cfg.num_frames,
        cfg.fmin,
        cfg.fmax,
        cfg.log_epsilon,
    )
    out += _pack_str(spec.name)
    out += struct.pack("<IIIII", spec.num_classes, *spec.input_shape, len(spec.layers))
    for layer in spec.layers:
        out += struct.pack(
            "<BBBBBBHI",
            _KIND_CODES[layer.kind],
            layer.kernel_h,
            layer.kernel_w,
            layer.stride,
            layer.pool_h,
            layer.pool_w,
            0,
            layer.out_channels,
        )
    out += struct.pack("<I", len(labels))
    for label in labels:
        out += _pack_str(label)

    blob = bytearray()
    for i, (layer, w) in enumerate(zip(spec.layers, weights.layers)):
        where = f"layer {i} ({layer.label()})"
        if layer.kind == CONV:
            if not isinstance(w, ConvWeights):
                raise WeightShapeError(f"{where}: conv weights missing")
            blob += quantize_weights(w.weights, where).astype("<f2").tobytes()
            blob += quantize_weights(w.bias, where).astype("<f2").tobytes()
        elif layer.kind == DENSE:
            if not isinstance(w, DenseWeights):
                raise WeightShapeError(f"{where}: dense weights missing")
            blob += quantize_weights(w.weights, where).astype("<f2").tobytes()
            blob += quantize_weights(w.bias, where).astype("<f2").tobytes()
    expected = weight_blob_bytes(spec)
    if len(blob) != expected:
        raise WeightShapeError(f"weight blob is {len(blob)} bytes, spec needs {expected}")
    out += struct.pack("<Q", len(blob))
    out += blob
    out += struct.pack("<I", zlib.crc32(bytes(out)) & 0xFFFFFFFF)
    return bytes(out)


def save_model(spec: NetworkSpec, weights: ModelWeights, cfg: FrontendConfig, labels, path) -> None:
    """Serialize and atomically write an AEDM file."""
    data = _serialize(spec, weights, cfg, labels)
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def load_model(path) -> tuple[NetworkSpec, ModelWeights, FrontendConfig, list[str]]:
    """Parse an AEDM file; weights come back dequantized to float32."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 4 or raw[:4] != MAGIC:
        raise BadMagicError(f"{path}: not an AEDM file")
    if len(raw) < 10:
        raise ChecksumMismatchError(f"{path}: truncated")
    version = struct.unpack_from("<H", raw, 4)[0]
    if version != FORMAT_VERSION:
        raise BadVersionError(f"{path}: format version {version}, reader supports {FORMAT_VERSION}")
    stored_crc = struct.unpack_from("<I", raw, len(raw) - 4)[0]
    actual_crc = zlib.crc32(raw[:-4]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise ChecksumMismatchError(
            f"{path}: CRC mismatch (stored {stored_crc:08x}, computed {actual_crc:08x})"
        )

    r = _Reader(raw, pos=6)
    sr, window_ms, hop_ms, fft_size, num_mels, num_frames, fmin, fmax, log_eps = r.take("<IddIIIddd")
    name = r.take_str()
    num_classes, in_h, in_w, in_c, n_layers = r.take("<IIIII")
    raw_layers = []
    for _ in range(n_layers):
        code, kh, kw, stride, ph, pw, _, out_ch = r.take("<BBBBBBHI")
        if code not in _CODE_KINDS:
            raise ModelFormatError(f"{path}: unknown layer kind code {code}")
        raw_layers.append((code, kh, kw, stride, ph, pw, out_ch))
    try:  # a CRC-valid file can still describe an invalid config/network
        cfg = FrontendConfig(
            sample_rate=sr,
            window_ms=window_ms,
            hop_ms=hop_ms,
            fft_size=fft_size,
            num_mels=num_mels,
            num_frames=num_frames,
            fmin=fmin,
            fmax=fmax,
            log_epsilon=log_eps,
        )
        layers = [
            LayerSpec(
                _CODE_KINDS[code],
                kernel_h=kh,
                kernel_w=kw,
                stride=stride,
                out_channels=out_ch,
                pool_h=ph,
                pool_w=pw,
            )
            for code, kh, kw, stride, ph, pw, out_ch in raw_layers
        ]
        spec = NetworkSpec(
            name=name, input_shape=(in_h, in_w, in_c), layers=tuple(layers), num_classes=num_classes
        )
    except ModelFormatError:
        raise
    except Exception as e:
        raise ModelFormatError(f"{path}: invalid model description: {e}") from e
    n_labels = r.take("<I")
    labels = [r.take_str() for _ in range(n_labels)]
    if len(labels) != num_classes:
        raise WeightShapeError(f"{path}: {n_labels} labels for {num_classes} classes")

    blob_len = r.take("<Q")
    expected = weight_blob_bytes(spec)
    if blob_len != expected:
        raise WeightShapeError(f"{path}: weight blob {blob_len} bytes, spec needs {expected}")
    blob = r.take_bytes(blob_len)
    if r.pos != len(raw) - 4:
        raise ModelFormatError(f"{path}: {len(raw) - 4 - r.pos} unexpected trailing bytes")

    values = np.frombuffer(blob, dtype="<f2")
    pos = 0
    loaded: list = []
    cur = spec.input_shape
    for layer, shape in zip(spec.layers, infer_shapes(spec)):
        if layer.kind == CONV:
            wn = layer.kernel_h * layer.kernel_w * cur[2] * layer.out_channels
            w = values[pos : pos + wn].reshape(layer.out_channels, layer.kernel_h, layer.kernel_w, cur[2])
            pos += wn
            b = values[pos : pos + layer.out_channels]
            pos += layer.out_channels
            loaded.append(ConvWeights(dequantize_weights(w), dequantize_weights(b)))
        elif layer.kind == DENSE:
            wn = int(cur) * layer.out_channels
            w = values[pos : pos + wn].reshape(layer.out_channels, int(cur))
            pos += wn
            b = values[pos : pos + layer.out_channels]
            pos += layer.out_channels
            loaded.append(DenseWeights(dequantize_weights(w), dequantize_weights(b)))
        else:
            loaded.append(None)
        cur = shape
    return spec, ModelWeights(tuple(loaded)), cfg, labels
