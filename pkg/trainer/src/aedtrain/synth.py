"""Synthetic labeled audio: six spectrally distinct signal classes.

Every clip is generated from an independent integer seed recorded in the
manifest, so the whole dataset regenerates bit-identically from the manifest
alone. Splits are stratified per class: 25 % test, then 25 % of the
remaining pool held out as validation.
"""

import json
from dataclasses import dataclass, field

import numpy as np

DEFAULT_CLASSES = (
    "steady_tone",
    "chirp",
    "noise_burst",
    "am_tone",
    "square_wave",
    "pink_noise",
)

MANIFEST_VERSION = 1


class DatasetConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Clip:
    clip_id: str
    label: str
    seed: int
    split: str  # train | validation | test


@dataclass(frozen=True)
class DatasetManifest:
    seed: int
    sample_rate: int
    clip_seconds: float
    classes: tuple[str, ...]
    clips: tuple[Clip, ...] = field(default_factory=tuple)

    def by_split(self, split: str) -> list[Clip]:
        return [c for c in self.clips if c.split == split]

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": MANIFEST_VERSION,
                "seed": self.seed,
                "sample_rate": self.sample_rate,
                "clip_seconds": self.clip_seconds,
                "classes": list(self.classes),
                "clips": [
                    {"id": c.clip_id, "label": c.label, "seed": c.seed, "split": c.split}
                    for c in self.clips
                ],
            },
            indent=2,
        )

    @staticmethod
    def from_json(text: str) -> "DatasetManifest":
        d = json.loads(text)
        if d.get("version") != MANIFEST_VERSION:
            raise DatasetConfigError(f"unsupported manifest version {d.get('version')}")
        clips = tuple(Clip(c["id"], c["label"], c["seed"], c["split"]) for c in d["clips"])
        return DatasetManifest(
            seed=d["seed"],
            sample_rate=d["sample_rate"],
            clip_seconds=d["clip_seconds"],
            classes=tuple(d["classes"]),
            clips=clips,
        )


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def build_manifest(
    seed: int = 0,
    clips_per_class: int = 50,
    classes=DEFAULT_CLASSES,
    sample_rate: int = 16000,
    clip_seconds: float = 4.0,
) -> DatasetManifest:
    """Assign per-clip seeds and stratified train/validation/test splits."""
    classes = tuple(classes)
    if len(classes) < 2:
        raise DatasetConfigError("need at least 2 classes")
    if len(set(classes)) != len(classes):
        raise DatasetConfigError("duplicate class names")
    unknown = set(classes) - set(DEFAULT_CLASSES)
    if unknown:
        raise DatasetConfigError(f"no generator for classes: {sorted(unknown)}")
    if clips_per_class < 20:
        raise DatasetConfigError("need at least 20 clips per class")

    rng = np.random.default_rng(seed)
    clips: list[Clip] = []
    for label in classes:
        n = clips_per_class
        n_test = _round_half_up(0.25 * n)
        pool = n - n_test
        n_val = _round_half_up(0.25 * pool)
        order = rng.permutation(n)
        splits = np.empty(n, dtype=object)
        splits[order[:n_test]] = "test"
        splits[order[n_test : n_test + n_val]] = "validation"
        splits[order[n_test + n_val :]] = "train"
        for i in range(n):
            clip_seed = int(rng.integers(0, 2**31 - 1))
            clips.append(Clip(f"{label}_{i:04d}", label, clip_seed, str(splits[i])))
    return DatasetManifest(
        seed=seed,
        sample_rate=sample_rate,
        clip_seconds=clip_seconds,
        classes=classes,
        clips=tuple(clips),
    )


# ----------------------------------------------------------- generators


def _steady_tone(rng, t):
    f = np.exp(rng.uniform(np.log(300.0), np.log(2500.0)))
    phase = rng.uniform(0, 2 * np.pi)
    return 0.5 * np.sin(2 * np.pi * f * t + phase)


def _chirp(rng, t):
    f0 = rng.uniform(100.0, 800.0)
    f1 = rng.uniform(2000.0, 6000.0)
    k = (f1 - f0) / t[-1]
    return 0.5 * np.sin(2 * np.pi * (f0 * t + 0.5 * k * t**2))


def _noise_burst(rng, t):
    # hard-gated white noise: crisp broadband on/off edges
    noise = rng.standard_normal(t.shape) * 0.4
    gate = np.zeros_like(t)
    n_bursts = rng.integers(3, 6)
    for _ in range(n_bursts):
        start = rng.uniform(0.0, 0.85) * t[-1]
        width = rng.uniform(0.08, 0.25) * t[-1]
        gate[(t >= start) & (t < start + width)] = 1.0
    return noise * gate


def _am_tone(rng, t):
    # near-full modulation depth: strong temporal stripes at the mod rate
    carrier = rng.uniform(800.0, 3000.0)
    rate = rng.uniform(3.0, 8.0)
    depth = rng.uniform(0.85, 1.0)
    env = 1.0 + depth * np.sin(2 * np.pi * rate * t)
    return 0.25 * env * np.sin(2 * np.pi * carrier * t)


def _square_wave(rng, t):
    # low fundamental: dense odd-harmonic comb across the band
    f = rng.uniform(100.0, 500.0)
    phase = rng.uniform(0, 2 * np.pi)
    return 0.45 * np.sign(np.sin(2 * np.pi * f * t + phase))


def _pink_noise(rng, t):
    white = rng.standard_normal(t.shape)
    spectrum = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(len(t))
    spectrum[1:] /= np.sqrt(freqs[1:] / freqs[1])
    pink = np.fft.irfft(spectrum, n=len(t))
    return 0.3 * pink / max(np.abs(pink).max(), 1e-9)


_GENERATORS = {
    "steady_tone": _steady_tone,
    "chirp": _chirp,
    "noise_burst": _noise_burst,
    "am_tone": _am_tone,
    "square_wave": _square_wave,
    "pink_noise": _pink_noise,
}


def synthesize(clip: Clip, sample_rate: int, clip_seconds: float) -> np.ndarray:
    """Regenerate a clip's waveform from its manifest entry (bit-reproducible)."""
    rng = np.random.default_rng(clip.seed)
    n = round(sample_rate * clip_seconds)
    t = np.arange(n, dtype=np.float64) / sample_rate
    return _GENERATORS[clip.label](rng, t)
