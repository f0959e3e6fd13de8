"""Exception hierarchy.

Every error carries a stable class name; the CLI maps the three families
below onto exit codes 2 (input), 3 (insufficient data) and 4 (degenerate).
"""


class PMSignalError(Exception):
    exit_code = 1


class InputError(PMSignalError, ValueError):
    exit_code = 2


class InsufficientDataError(PMSignalError):
    exit_code = 3


class DegenerateStatisticError(PMSignalError, ArithmeticError):
    exit_code = 4


class MalformedRecord(InputError):
    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class PriceOutOfRange(MalformedRecord):
    pass


class NonPositiveSize(MalformedRecord):
    pass


class UnknownSide(MalformedRecord):
    pass


class MissingTraderIds(InputError):
    pass


class DomainError(InputError):
    pass


class ConfigInvalid(InputError):
    pass


class WeightSumViolation(InputError):
    pass


class MissingPlatformPrice(InputError):
    pass


class MissingNoPrice(InputError):
    pass


class EmptySeries(InputError):
    pass


class PerturbationOutOfRange(InputError):
    pass


class EmptyGrid(InputError):
    pass


class InsufficientData(InsufficientDataError):
    pass


class EmptyWindow(InsufficientData):
    pass


class NoBaseline(InsufficientData):
    pass


class DegenerateVariance(DegenerateStatisticError):
    pass


class DegenerateFlow(DegenerateStatisticError):
    pass
