"""Exception hierarchy shared by all matteval modules."""


class MattevalError(Exception):
    """Base class for toolkit errors."""


class DimensionMismatch(MattevalError):
    pass


class RangeViolation(MattevalError):
    pass


class EmptyRegion(MattevalError):
    pass


class LengthMismatch(MattevalError):
    pass


class SequenceTooShort(MattevalError):
    pass


class TooManyReferences(MattevalError):
    pass


class GridError(MattevalError):
    """Image too small for the requested patch grid."""


class UnsupportedFormat(MattevalError):
    pass


class CorruptHeader(MattevalError):
    pass


class DimensionOverflow(MattevalError):
    pass


class SchemaViolation(MattevalError):
    pass


class DuplicateFrameId(MattevalError):
    pass


class ConfigError(MattevalError):
    pass
