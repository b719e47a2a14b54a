"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class MstSeedError(Exception):
    exit_code = 1


class ConfigError(MstSeedError):
    exit_code = 2


class DataError(MstSeedError):
    exit_code = 3


class DataFormatError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class UnsupportedOperationError(DataError):
    pass


class ContractError(MstSeedError):
    """A caller violated a documented precondition (shapes, lengths, symmetry)."""

    exit_code = 4


class NumericError(MstSeedError):
    exit_code = 4


class DomainError(NumericError):
    """Input outside the domain of a metric (negative or zero-sum vector)."""


class DegenerateError(NumericError):
    """A quantity collapsed (zero threshold, zero diameter, coincident centroids)."""


class RangeError(NumericError):
    pass
