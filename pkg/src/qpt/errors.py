"""Exception types shared across the package."""


class QptError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedDimension(QptError):
    """Requested dimension has no mutually unbiased basis construction here."""


class IndexOutOfRange(QptError):
    """A basis, state, or operator index is outside its valid range."""


class DimensionMismatch(QptError):
    """Operands live in different Hilbert-space dimensions."""


class FidelityOutOfRange(QptError):
    pass


class EmptySubset(QptError):
    pass


class WeightsNotNormalized(QptError):
    """Diagonal process-matrix weights must be nonnegative and sum to one."""


class NotPositive(QptError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class InvalidModel(QptError):
    """Unrecognized count-sampling model specification."""


class IncompleteData(QptError):
    """Tomography data does not cover all preparation and measurement bases."""


class BasisMismatch(QptError):
    """Process matrices refer to different operator bases."""


class MissingEntries(QptError):
    pass


class OutOfRange(QptError):
    pass


class NotAState(QptError):
    """Matrix is not a valid density operator."""


class PovmInvalid(QptError):
    pass


class DataFormatError(QptError):
    """A persisted file could not be parsed."""


class ConfigError(QptError):
    """A run configuration is missing fields or holds invalid values."""
