"""Exception hierarchy shared across the package."""


class MechRevError(Exception):
    """Base class for all package errors."""


class InvalidSpec(MechRevError, ValueError):
    pass


class SupportExplosion(MechRevError):
    """Expanding an instance would exceed the atom cap."""


class IndexOutOfRange(MechRevError, IndexError):
    pass


class EmptySubset(MechRevError, ValueError):
    pass


class NonPositiveScale(MechRevError, ValueError):
    pass


class InvalidLP(MechRevError, ValueError):
    pass


class IterationLimit(MechRevError):
    pass


class SupportTooLarge(MechRevError):
    pass


class DimensionMismatch(MechRevError, ValueError):
    pass


class ZeroItemRevenue(MechRevError, ValueError):
    pass


class TooManyClasses(MechRevError):
    pass


class IndependenceViolated(MechRevError):
    pass


class PreconditionViolated(MechRevError):
    pass


class ZeroProbabilitySubdomain(MechRevError, ValueError):
    pass


class WrongKind(MechRevError, ValueError):
    pass


class NotCommonP(MechRevError, ValueError):
    pass


class BadParams(MechRevError, ValueError):
    pass


class ParseError(MechRevError, ValueError):
    def __init__(self, msg, line=None, column=None):
        if line is not None:
            msg = f"{msg} (line {line}, column {column})"
        super().__init__(msg)
        self.line = line
        self.column = column


class CapExceeded(MechRevError):
    def __init__(self, cap, msg):
        super().__init__(f"{cap}: {msg}")
        self.cap = cap
