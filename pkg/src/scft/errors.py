"""Exception types shared across the package."""


class ScftError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ScftError, ValueError):
    """A configuration is structurally invalid (unknown node, bad rates, ...)."""


class ValidationError(ScftError, ValueError):
    """An input value violates an operation's contract."""


class FusionError(ScftError, ValueError):
    """Reports cannot be fused (missing or duplicate node, mismatched snapshots)."""


class DecodeError(ScftError, ValueError):
    """A coded spectrum and a codebook disagree in shape."""


class MetricUndefinedError(ScftError, ValueError):
    """A metric has no defined value for the given inputs (e.g. no matched pairs)."""


class WireFormatError(ScftError, ValueError):
    """Base class for report deserialization failures."""


class BadMagicError(WireFormatError):
    """The byte stream does not start with the report magic."""


class UnsupportedVersionError(WireFormatError):
    """The report declares a format version this build cannot parse."""


class TruncatedPayloadError(WireFormatError):
    """The byte stream ends before the declared payload does."""


class BinOrderError(WireFormatError):
    """The decoded bin indices are not strictly increasing."""
