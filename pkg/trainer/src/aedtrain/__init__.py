"""aedtrain: toy-scale training harness exporting AEDM models for aedet."""

from .export import export_model, to_runtime_weights
from .features import load_split, materialize
from .model import ConvClassifier, build_model, mels_to_batch
from .synth import DEFAULT_CLASSES, DatasetManifest, build_manifest, synthesize
from .train import TrainConfig, TrainResult, evaluate, train

__all__ = [
    "ConvClassifier",
    "DEFAULT_CLASSES",
    "DatasetManifest",
    "TrainConfig",
    "TrainResult",
    "build_manifest",
    "build_model",
    "evaluate",
    "export_model",
    "load_split",
    "materialize",
    "mels_to_batch",
    "synthesize",
    "to_runtime_weights",
    "train",
]
