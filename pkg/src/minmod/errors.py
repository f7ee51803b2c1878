"""Exception hierarchy shared by every module of the package."""


class MinModError(Exception):
    """Base class for all errors raised by :mod:`minmod`."""


class InvalidInput(MinModError, ValueError):
    """Base class for errors caused by bad user input."""


class ParseError(InvalidInput):
    pass


class BadExponent(InvalidInput):
    pass


class BadDimension(InvalidInput):
    pass


class BadParams(InvalidInput):
    pass


class OpaqueSpace(InvalidInput):
    """A vector operation was requested on a space without a vector model."""


class ZeroVector(InvalidInput):
    pass


class SpaceMismatch(InvalidInput):
    pass


class IndexOutOfRange(InvalidInput, IndexError):
    pass


class DimensionTooLarge(InvalidInput):
    pass


class UnsupportedSpace(InvalidInput):
    pass


class NotUnitNorm(InvalidInput):
    pass


class NotWeaklyNull(InvalidInput):
    pass


class WrongDomain(InvalidInput):
    pass


class SupportExceedsTruncation(InvalidInput):
    pass


class NotInCatalog(InvalidInput):
    pass


class UnknownExample(InvalidInput, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class BadExponents(BadExponent):
    pass


class FunctionalNotFound(MinModError):
    """No unit norming functional is representable for the given vector."""


class NonConvergent(MinModError):
    """Truncation levels were exhausted before the estimates stabilized.

    The partial trace is attached as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report
