"""Exception taxonomy shared across the package."""


class ReposeError(Exception):
    """Base class for all package-specific errors."""


class InputError(ReposeError):
    """User-supplied input violates a precondition (maps to HTTP 422)."""

    def __init__(self, message, field=None, hint=None):
        super().__init__(message)
        self.field = field
        self.hint = hint


class ContractViolation(ReposeError):
    """Internal API misuse: a caller broke an operation contract."""


class ConfigError(ReposeError):
    """Configuration file is invalid or references missing resources."""

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class NoSubjectFoundError(InputError):
    """Text query matched no segmentable subject."""


class DegenerateDepthError(InputError):
    """Depth statistics are unusable (e.g. zero median source disparity)."""


class SkipSample(ReposeError):
    """Training-data generator could not produce a valid sample; skip it."""


class SessionBusyError(ReposeError):
    """A commit is already in flight on this session (maps to HTTP 409)."""


class UnknownSessionError(ReposeError):
    """Session id does not exist (maps to HTTP 404)."""


class StageError(ReposeError):
    """A pipeline stage failed; carries the stage label and partials."""

    def __init__(self, stage, cause, partial=None):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.partial = partial
