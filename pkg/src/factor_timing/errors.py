"""Exception hierarchy.

Three families map onto the CLI exit codes: configuration problems (1),
bad input data (2) and numerical failures (3).
"""


class FactorTimingError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ConfigError(FactorTimingError, ValueError):
    exit_code = 1


class DataError(FactorTimingError, ValueError):
    exit_code = 2


class NumericError(FactorTimingError, ArithmeticError):
    exit_code = 3


# -- data ------------------------------------------------------------------

class MalformedRow(DataError):
    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}"
        if line is not None:
            where += f"{':' if where else 'line '}{line}"
        super().__init__(f"{where}: {message}" if where else message)


class EmptyInput(DataError):
    pass


class DuplicateMonth(DataError):
    pass


class MissingColumn(DataError):
    pass


class NoOverlap(DataError):
    pass


class InsufficientRows(DataError):
    pass


class NonContiguousMonths(DataError):
    pass


class EmptyPartition(DataError):
    pass


class ArityMismatch(DataError):
    pass


class Misalignment(DataError):
    pass


class EmptyPeriod(DataError):
    pass


class MissingArtifacts(DataError):
    pass


# -- numerics --------------------------------------------------------------

class SingularDesign(NumericError):
    pass


class TooFewRows(NumericError):
    pass


class TooFewObservations(NumericError):
    pass


class ZeroVariance(NumericError):
    pass


class NonpositiveVariance(NumericError):
    pass


class ZeroVolatility(NumericError):
    pass


class ZeroDenominator(NumericError):
    pass


class DivergedTraining(NumericError):
    pass


class ForecastFailure(NumericError):
    """A model failed to fit or predict for one forecast month."""

    def __init__(self, month, cause):
        self.month = month
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", NumericError.exit_code)
        super().__init__(f"forecast for month {month} failed: {cause}")
