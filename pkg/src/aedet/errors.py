"""Exception hierarchy. Every error raised by this package derives from AedetError."""


class AedetError(Exception):
    """Base class for all errors raised by aedet."""


class ContractViolationError(AedetError):
    """An operation was called with arguments that violate its preconditions."""


class UnsupportedConfigError(AedetError):
    """A configuration value is outside the supported envelope (e.g. stride 3)."""


class ShapeInferenceError(AedetError):
    """Shape propagation failed; the message names the offending layer."""


class UnknownPresetError(AedetError):
    """Requested architecture preset does not exist."""


class InsufficientAudioError(AedetError):
    """Audio is too short for the requested analysis window."""

    def __init__(self, message: str, required_samples: int):
        super().__init__(message)
        self.required_samples = required_samples


class DegenerateFilterbankError(AedetError):
    """Mel filterbank construction produced an empty filter."""


class FileFormatError(AedetError):
    """Base for malformed on-disk artifacts."""


class WavFormatError(FileFormatError):
    """WAV file is missing chunks or uses an unsupported encoding."""


class MelsFormatError(FileFormatError):
    """MELS feature dump has a bad magic or version."""


class ModelFormatError(FileFormatError):
    """Base for AEDM model-container integrity failures."""


class BadMagicError(ModelFormatError):
    """File does not start with the AEDM magic."""


class BadVersionError(ModelFormatError):
    """AEDM format version is not supported by this reader."""


class ChecksumMismatchError(ModelFormatError):
    """Trailing CRC32 does not match the file contents (truncation/corruption)."""


class WeightShapeError(ModelFormatError):
    """Stored weight blob does not match the network description."""


class QuantizationOverflowError(ModelFormatError):
    """A weight exceeds the representable 16-bit float range."""


class ModelIntegrityError(AedetError):
    """Loaded weights do not fit the network spec they accompany."""
