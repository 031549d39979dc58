"""Subject repositioning toolkit: segment, relocate, regenerate, blend."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ContractViolation,
    DegenerateDepthError,
    InputError,
    NoSubjectFoundError,
    ReposeError,
    SessionBusyError,
    SkipSample,
    StageError,
    UnknownSessionError,
)
from .types import ConditionSequence, DepthMap, Image, Mask, NoiseLevel, binary_mask

__all__ = [
    "__version__",
    "ConditionSequence",
    "ConfigError",
    "ContractViolation",
    "DegenerateDepthError",
    "DepthMap",
    "Image",
    "InputError",
    "Mask",
    "NoSubjectFoundError",
    "NoiseLevel",
    "ReposeError",
    "SessionBusyError",
    "SkipSample",
    "StageError",
    "UnknownSessionError",
    "binary_mask",
]
