"""Exception hierarchy shared by all modules."""


class WalkerError(Exception):
    """Base class for every error raised by this package."""


class ParseError(WalkerError, ValueError):
    """Malformed expression text.

    ``offset`` is the byte offset (UTF-8) into the source text where the
    problem was detected.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class UnknownSymbolError(ParseError):
    pass


class CoordinateRangeError(ParseError):
    pass


class SpecError(WalkerError, ValueError):
    """A metric-spec document violates the Walker normal-form contract."""


class DomainError(WalkerError, ArithmeticError):
    """Evaluation left the real domain (log of nonpositive, 0 division, ...)."""


class DegenerateScreenError(WalkerError):
    """The screen block g_ij is not positive definite at a point."""


class BlockFormError(WalkerError):
    """A curvature/holonomy matrix is not in so(1, n+1)_{RU} block form."""


class ClosureError(WalkerError):
    """Lie bracket closure did not stabilise within the round cap."""
