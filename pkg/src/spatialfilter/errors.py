"""Exception hierarchy.

Every error carries a short ``code`` string and the CLI exit status that the
command line front-end maps it to (2 config, 3 data, 4 numerical).
"""


class SpatialFilterError(Exception):
    code = "Error"
    exit_code = 1


class ConfigError(SpatialFilterError, ValueError):
    code = "ConfigError"
    exit_code = 2


class InvalidCPrime(ConfigError):
    code = "InvalidCPrime"


class DataError(SpatialFilterError, ValueError):
    code = "DataError"
    exit_code = 3


class BadMagic(DataError):
    code = "BadMagic"


class UnsupportedVersion(DataError):
    code = "UnsupportedVersion"


class TruncatedPayload(DataError):
    code = "TruncatedPayload"


class InvalidLabel(DataError):
    code = "InvalidLabel"


class NonFiniteSample(DataError):
    code = "NonFiniteSample"


class EmptyDataset(DataError):
    code = "EmptyDataset"


class InconsistentShape(DataError):
    code = "InconsistentShape"


class InvalidWindow(DataError):
    code = "InvalidWindow"


class EvenTaps(DataError):
    code = "EvenTaps"


class InvalidBand(DataError):
    code = "InvalidBand"


class EpochTooShort(DataError):
    code = "EpochTooShort"


class MissingClass(DataError):
    code = "MissingClass"


class TooFewTrials(DataError):
    code = "TooFewTrials"


class NumericalError(SpatialFilterError, ArithmeticError):
    code = "NumericalError"
    exit_code = 4


class SingularCovariance(NumericalError):
    code = "SingularCovariance"


class NotPositiveDefinite(NumericalError):
    code = "NotPositiveDefinite"


class EigFailed(NumericalError):
    code = "EigFailed"


class DegenerateFilter(NumericalError):
    code = "DegenerateFilter"


class MaxIterExceeded(NumericalError):
    code = "MaxIterExceeded"


class ConvergenceWarning(RuntimeWarning):
    """Issued when an iterative routine stops at its iteration cap."""
