"""WAV ingestion and the MELS feature-dump format.

WAV support is deliberately narrow: RIFF/WAVE with PCM 16-bit or IEEE float32
samples, any channel count (averaged to mono). The stdlib wave module cannot
read float WAVs, hence the small chunk parser here.

MELS layout (little-endian throughout):
    magic 'MELS' | version u16 | num_frames u32 | num_mels u32 | f32 data
Data is row-major, frame-major: frame 0's mel values first.
"""

import csv
import struct

import numpy as np

from .errors import MelsFormatError, WavFormatError

MELS_MAGIC = b"MELS"
MELS_VERSION = 1

_WAVE_PCM = 1
_WAVE_FLOAT = 3


def read_wav(path) -> tuple[np.ndarray, int]:
    """Read a WAV file; returns (mono float64 samples in [-1, 1], sample_rate)."""
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise WavFormatError(f"{path}: not a RIFF/WAVE file")
    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid, size = struct.unpack_from("<4sI", raw, pos)
        body = raw[pos + 8 : pos + 8 + size]
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            data = body
        pos += 8 + size + (size & 1)  # chunks are word-aligned
    if fmt is None or data is None:
        raise WavFormatError(f"{path}: missing fmt/data chunk")
    tag, channels, rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if tag == 0xFFFE and len(fmt) >= 26:  # WAVE_FORMAT_EXTENSIBLE: subformat leads the GUID
        tag = struct.unpack_from("<H", fmt, 24)[0]
    if channels < 1:
        raise WavFormatError(f"{path}: zero channels")
    if tag == _WAVE_PCM and bits == 16:
        samples = np.frombuffer(data, dtype="<i2").astype(np.float64) / 32768.0
    elif tag == _WAVE_FLOAT and bits == 32:
        samples = np.frombuffer(data, dtype="<f4").astype(np.float64)
    else:
        raise WavFormatError(
            f"{path}: unsupported encoding (format tag {tag}, {bits}-bit); "
            "only PCM16 and float32 are handled"
        )
    if channels > 1:
        samples = samples[: len(samples) - len(samples) % channels]
        samples = samples.reshape(-1, channels).mean(axis=1)
    return samples, rate


def write_wav(path, samples: np.ndarray, sample_rate: int, sample_format: str = "pcm16"):
    """Write mono WAV, PCM16 ('pcm16') or IEEE float32 ('float32')."""
    samples = np.asarray(samples, dtype=np.float64)
    if sample_format == "pcm16":
        tag, bits = _WAVE_PCM, 16
        payload = np.clip(np.round(samples * 32767.0), -32768, 32767).astype("<i2").tobytes()
    elif sample_format == "float32":
        tag, bits = _WAVE_FLOAT, 32
        payload = samples.astype("<f4").tobytes()
    else:
        raise WavFormatError(f"unknown sample format {sample_format!r}")
    block = bits // 8
    fmt = struct.pack("<HHIIHH", tag, 1, sample_rate, sample_rate * block, block, bits)
    body = b"WAVE" + b"fmt " + struct.pack("<I", len(fmt)) + fmt
    body += b"data" + struct.pack("<I", len(payload)) + payload
    with open(path, "wb") as f:
        f.write(b"RIFF" + struct.pack("<I", len(body)) + body)


def write_mels(path, mels: np.ndarray):
    """Write a (num_frames, num_mels) grid as a MELS file."""
    mels = np.asarray(mels, dtype="<f4")
    if mels.ndim != 2:
        raise MelsFormatError(f"expected a 2-D mel grid, got shape {mels.shape}")
    with open(path, "wb") as f:
        f.write(MELS_MAGIC)
        f.write(struct.pack("<HII", MELS_VERSION, mels.shape[0], mels.shape[1]))
        f.write(np.ascontiguousarray(mels).tobytes())


def read_mels(path) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MELS_MAGIC:
        raise MelsFormatError(f"{path}: bad magic {raw[:4]!r}")
    version, frames, mels = struct.unpack_from("<HII", raw, 4)
    if version != MELS_VERSION:
        raise MelsFormatError(f"{path}: unsupported MELS version {version}")
    expect = 14 + 4 * frames * mels
    if len(raw) != expect:
        raise MelsFormatError(f"{path}: size {len(raw)} != expected {expect}")
    return np.frombuffer(raw, dtype="<f4", offset=14).reshape(frames, mels).copy()


def write_mels_csv(path, mels: np.ndarray):
    """Debug emitter: one CSV row per frame, one column per mel band."""
    mels = np.asarray(mels)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for row in mels:
            writer.writerow([f"{v:.8g}" for v in row])


def read_mels_csv(path) -> np.ndarray:
    with open(path, newline="") as f:
        rows = [[float(v) for v in row] for row in csv.reader(f) if row]
    return np.asarray(rows, dtype=np.float32)
