"""Exception hierarchy.

Every error raised by the package derives from :class:`FlangeWearError`.
Errors are grouped so the CLI can map them onto exit codes: bad input data
(:class:`DataError`, exit 2) versus numerical failure (:class:`NumericalError`,
exit 3).
"""


class FlangeWearError(Exception):
    pass


class DataError(FlangeWearError, ValueError):
    pass


class NumericalError(FlangeWearError, ArithmeticError):
    pass


# spectral
class InvalidSignal(DataError):
    pass


class FrequencyOutOfRange(DataError):
    pass


class NoNoiseDetected(DataError):
    pass


class DegenerateSpec(DataError):
    pass


# regress
class InvalidObservation(DataError):
    pass


class Underdetermined(DataError):
    pass


class OrderCapExceeded(DataError):
    pass


class InsufficientData(DataError):
    pass


class SingularSystem(NumericalError):
    pass


class ZeroVariance(NumericalError):
    pass


# iirdesign
class InvalidSpec(DataError):
    pass


class NyquistEdge(InvalidSpec):
    pass


class OrderOutOfRange(DataError):
    pass


class DegenerateMapping(NumericalError):
    pass


# iirruntime
class InvalidSample(DataError):
    pass


class SampleRateMismatch(DataError):
    pass


class NumericalOverflow(NumericalError):
    pass


class PoleAtDC(NumericalError):
    pass


class UnstableFilter(NumericalError):
    pass


# rig
class OutOfSurfaceRange(DataError):
    pass


class NoBracket(NumericalError):
    pass


class RangeExceeded(DataError):
    pass


class AliasingRisk(DataError):
    pass


# pipeline
class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(DataError):
    pass


class DivisionDomain(DataError):
    pass
