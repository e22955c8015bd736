"""Exception hierarchy.  Every error raised on bad input derives from
:class:`CopulaError`, itself a :class:`ValueError`."""


class CopulaError(ValueError):
    pass


class NonSquare(CopulaError):
    pass


class NegativeMass(CopulaError):
    pass


class MarginalViolation(CopulaError):
    def __init__(self, message: str, axis: str, index: int, deviation: float):
        super().__init__(message)
        self.axis = axis
        self.index = index
        self.deviation = deviation


class DomainError(CopulaError):
    pass


class ResolutionMismatch(CopulaError):
    pass


class ParamOutOfRange(CopulaError):
    pass


class NotStochasticallyIncreasing(CopulaError):
    def __init__(self, message: str, row: int, violation: float):
        super().__init__(message)
        self.row = row
        self.violation = violation


class TooFewSamples(CopulaError):
    pass


class DegenerateRanks(CopulaError):
    pass


class DegenerateFunctional(CopulaError):
    pass


class GridFormatError(CopulaError):
    pass
