"""Dataset materialization: WAV files plus MELS features from the primary frontend.

Features are produced by the runtime's own `frontend` command (invoked
in-process through its argv entry point) so training and deployment see
byte-identical feature extraction. Nothing here re-implements the DSP.
"""

import contextlib
import io
import os

import numpy as np
from aedet import audio
from aedet.cli import main as aedet_cli

from .synth import Clip, DatasetManifest, synthesize


class FeatureExtractionError(RuntimeError):
    pass


def materialize(manifest: DatasetManifest, root) -> None:
    """Write manifest.json plus wav/ and mels/ for every clip (skips fresh files)."""
    wav_dir = os.path.join(root, "wav")
    mels_dir = os.path.join(root, "mels")
    os.makedirs(wav_dir, exist_ok=True)
    os.makedirs(mels_dir, exist_ok=True)
    with open(os.path.join(root, "manifest.json"), "w") as f:
        f.write(manifest.to_json())
    for clip in manifest.clips:
        wav_path = wav_path_for(root, clip)
        mels_path = mels_path_for(root, clip)
        if not os.path.exists(wav_path):
            samples = synthesize(clip, manifest.sample_rate, manifest.clip_seconds)
            audio.write_wav(wav_path, samples, manifest.sample_rate, "float32")
        if not os.path.exists(mels_path):
            with contextlib.redirect_stdout(io.StringIO()):  # per-clip "wrote ..." chatter
                code = aedet_cli(["frontend", "--wav", wav_path, "--out", mels_path])
            if code != 0:
                raise FeatureExtractionError(f"aedet frontend failed ({code}) for {wav_path}")


def wav_path_for(root, clip: Clip) -> str:
    return os.path.join(root, "wav", f"{clip.clip_id}.wav")


def mels_path_for(root, clip: Clip) -> str:
    return os.path.join(root, "mels", f"{clip.clip_id}.mels")


def load_split(manifest: DatasetManifest, root, split: str):
    """(features float32 (N, frames, mels), labels int64 (N,)) for one split."""
    clips = manifest.by_split(split)
    if not clips:
        raise FeatureExtractionError(f"split {split!r} is empty")
    grids = [audio.read_mels(mels_path_for(root, c)) for c in clips]
    x = np.stack(grids).astype(np.float32)
    y = np.array([manifest.classes.index(c.label) for c in clips], dtype=np.int64)
    return x, y


def load_manifest(root) -> DatasetManifest:
    with open(os.path.join(root, "manifest.json")) as f:
        return DatasetManifest.from_json(f.read())
