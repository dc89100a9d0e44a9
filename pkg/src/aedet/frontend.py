"""Audio front-end: windowed FFT power spectra folded into a log-mel tensor.

The default geometry (16 kHz, 32 ms hamming window, 10 ms hop, 64 mel bands,
400 frames) turns 4 s of audio into the 400x64x1 input the bundled networks
consume. 16 kHz is chosen so the 32 ms window is exactly 512 samples, a
power of two: the FFT needs no zero padding and the hop is a round 160.
"""

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import as_strided

from .errors import (
    ContractViolationError,
    DegenerateFilterbankError,
    InsufficientAudioError,
    UnsupportedConfigError,
)
from .kernels import Tensor


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


@dataclass(frozen=True)
class FrontendConfig:
    """Geometry of the audio-to-feature transform.

    fft_size=0 and fmax=None are filled in at construction (next power of two
    covering the window, and Nyquist).
    """

    sample_rate: int = 16000
    window_ms: float = 32.0
    hop_ms: float = 10.0
    fft_size: int = 0
    num_mels: int = 64
    num_frames: int = 400
    fmin: float = 0.0
    fmax: float = 0.0
    log_epsilon: float = 1e-6

    def __post_init__(self):
        if self.sample_rate <= 0 or self.window_ms <= 0 or self.hop_ms <= 0:
            raise UnsupportedConfigError("sample rate, window and hop must be positive")
        if self.num_mels < 1 or self.num_frames < 1:
            raise UnsupportedConfigError("num_mels and num_frames must be positive")
        if self.fft_size == 0:
            object.__setattr__(self, "fft_size", _next_pow2(self.window_samples))
        if self.fmax == 0.0 or self.fmax is None:
            object.__setattr__(self, "fmax", self.sample_rate / 2.0)
        if self.fft_size & (self.fft_size - 1):
            raise UnsupportedConfigError(f"fft_size must be a power of two, got {self.fft_size}")
        if self.window_samples > self.fft_size:
            raise UnsupportedConfigError(
                f"window of {self.window_samples} samples exceeds fft_size {self.fft_size}"
            )
        if not (0.0 <= self.fmin < self.fmax <= self.sample_rate / 2.0):
            raise UnsupportedConfigError(
                f"need 0 <= fmin < fmax <= Nyquist, got [{self.fmin}, {self.fmax}]"
            )
        if self.log_epsilon <= 0.0:
            raise UnsupportedConfigError("log_epsilon must be positive")

    @property
    def window_samples(self) -> int:
        return round(self.sample_rate * self.window_ms / 1000.0)

    @property
    def hop_samples(self) -> int:
        return round(self.sample_rate * self.hop_ms / 1000.0)

    @property
    def min_samples(self) -> int:
        """Samples needed so every frame is fully covered by real audio."""
        return (self.num_frames - 1) * self.hop_samples + self.window_samples

    @property
    def span_seconds(self) -> float:
        """Analysis span: num_frames hops of hop_ms (4.0 s at defaults)."""
        return self.num_frames * self.hop_ms / 1000.0


def hamming_window(n: int) -> np.ndarray:
    """w[k] = 0.54 - 0.46 cos(2 pi k / (n-1)); symmetric."""
    if n < 2:
        raise ContractViolationError(f"hamming window needs n >= 2, got {n}")
    k = np.arange(n, dtype=np.float64)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for _ in range(bits):
        rev = (rev << 1) | (idx & 1)
        idx >>= 1
    return rev


def _fft_radix2(frames: np.ndarray) -> np.ndarray:
    """Iterative radix-2 decimation-in-time FFT over the last axis.

    frames: (..., n) real or complex, n a power of two.
    """
    n = frames.shape[-1]
    x = np.asarray(frames, dtype=np.complex128)[..., _bit_reverse_indices(n)]
    lead = x.shape[:-1]
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        v = x.reshape(lead + (n // size, size))
        even = v[..., :half]
        odd = v[..., half:] * tw
        x = np.concatenate((even + odd, even - odd), axis=-1).reshape(lead + (n,))
        size *= 2
    return x


def fft_power_spectrum(frame: np.ndarray) -> np.ndarray:
    """One-sided power spectrum |DFT|^2 for bins 0..N/2."""
    frame = np.asarray(frame, dtype=np.float64)
    n = frame.shape[-1]
    if n < 2 or n & (n - 1):
        raise UnsupportedConfigError(f"frame length must be a power of two, got {n}")
    spec = _fft_radix2(frame)[..., : n // 2 + 1]
    return (spec.real**2 + spec.imag**2)


def hz_to_mel(f):
    """HTK mel scale: 2595 log10(1 + f/700)."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (np.power(10.0, np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class MelFilterbank:
    """Triangular mel filters sampled at FFT bin frequencies, peak 1.0 each."""

    weights: np.ndarray  # (num_mels, fft_size/2 + 1)
    center_hz: np.ndarray  # (num_mels,)
    center_mel: np.ndarray  # (num_mels,)


def build_mel_filterbank(cfg: FrontendConfig) -> MelFilterbank:
    """Equally mel-spaced triangles between fmin and fmax, peak-normalized to 1.

    Each filter rises linearly from the previous center and falls to the next;
    rows are renormalized by their sampled maximum so every peak is exactly 1.0.
    """
    n_bins = cfg.fft_size // 2 + 1
    bin_hz = np.arange(n_bins, dtype=np.float64) * cfg.sample_rate / cfg.fft_size
    mel_pts = np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax), cfg.num_mels + 2)
    hz_pts = mel_to_hz(mel_pts)
    weights = np.zeros((cfg.num_mels, n_bins), dtype=np.float64)
    for m in range(cfg.num_mels):
        lo, mid, hi = hz_pts[m], hz_pts[m + 1], hz_pts[m + 2]
        rising = (bin_hz - lo) / (mid - lo)
        falling = (hi - bin_hz) / (hi - mid)
        tri = np.maximum(0.0, np.minimum(rising, falling))
        peak = tri.max()
        if peak <= 0.0:
            raise DegenerateFilterbankError(
                f"mel filter {m} covers no FFT bin "
                f"({cfg.num_mels} filters over [{cfg.fmin}, {cfg.fmax}] Hz "
                f"with {n_bins} bins); reduce num_mels or widen the band"
            )
        weights[m] = tri / peak
    return MelFilterbank(weights=weights, center_hz=hz_pts[1:-1], center_mel=mel_pts[1:-1])


def log_mel_spectrogram(
    samples: np.ndarray, cfg: FrontendConfig, filterbank: MelFilterbank | None = None
) -> Tensor:
    """Full pipeline: frame, window, FFT power, mel fold, log. Returns
    a (num_frames, num_mels, 1) tensor.

    Requires (num_frames-1)*hop + window samples; extra samples are ignored.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 1:
        raise ContractViolationError("expected mono audio as a 1-D array")
    if samples.shape[0] < cfg.min_samples:
        raise InsufficientAudioError(
            f"need at least {cfg.min_samples} samples "
            f"({cfg.min_samples / cfg.sample_rate:.3f} s at {cfg.sample_rate} Hz), "
            f"got {samples.shape[0]}",
            required_samples=cfg.min_samples,
        )
    fb = filterbank if filterbank is not None else build_mel_filterbank(cfg)
    win, hop = cfg.window_samples, cfg.hop_samples
    stride = samples.strides[0]
    frames = as_strided(samples, shape=(cfg.num_frames, win), strides=(hop * stride, stride))
    windowed = frames * hamming_window(win)
    if win < cfg.fft_size:
        windowed = np.pad(windowed, ((0, 0), (0, cfg.fft_size - win)))
    power = fft_power_spectrum(windowed)
    mel = power @ fb.weights.T
    return Tensor(np.log(mel + cfg.log_epsilon)[:, :, np.newaxis])
