class NonUnitaryError(ValueError):
    pass


class NonHermitianError(ValueError):
    pass


class DimMismatchError(ValueError):
    pass


class BadIndexError(ValueError):
    pass


class InvalidStateError(ValueError):
    """Trace, hermiticity or positivity of a state is outside tolerance."""


class POutOfRangeError(ValueError):
    pass


class UnknownDetectorError(ValueError):
    pass


class InsufficientDataError(ValueError):
    pass


class InconclusiveError(ValueError):
    """An operation needs both arms decided but at least one Bell inequality holds."""


class ConfigError(ValueError):
    pass
