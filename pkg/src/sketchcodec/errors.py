"""Exception types. CLI exit codes are keyed off these categories."""


class SketchError(Exception):
    exit_code = 1


class ConfigError(SketchError, ValueError):
    """A codec parameter violates its constraint.

    ``name`` identifies which constraint failed, e.g. ``"bits"``.
    """

    exit_code = 3

    def __init__(self, name: str, message: str):
        super().__init__(message)
        self.name = name


class UnencodableVectorError(SketchError, ValueError):
    exit_code = 5


class DimensionMismatchError(SketchError, ValueError):
    exit_code = 5


class PackError(SketchError, ValueError):
    exit_code = 4


class FormatError(SketchError):
    exit_code = 4


class BadMagicError(FormatError):
    pass


class UnsupportedVersionError(FormatError):
    pass


class TruncatedFileError(FormatError):
    pass


class PadBitsError(FormatError, PackError):
    pass


class UndefinedCorrelationError(SketchError, ValueError):
    exit_code = 5
