"""Exception types shared across the package."""


class RelfixError(Exception):
    pass


class InvalidInput(RelfixError, ValueError):
    pass


class NoComparablePairs(RelfixError):
    pass


class MapEvalError(RelfixError, ArithmeticError):
    def __init__(self, message, component=None):
        super().__init__(message)
        self.component = component


class ParseError(RelfixError, ValueError):
    """Malformed expression text.

    ``position`` is a byte offset into the UTF-8 encoded input and
    ``expectation`` says what the parser wanted to see there.
    """

    def __init__(self, position, expectation, message=None):
        self.position = position
        self.expectation = expectation
        super().__init__(message or f"at byte {position}: expected {expectation}")


class UnknownIdentifier(ParseError):
    pass


class VariableOutOfRange(ParseError):
    pass


class LimitMismatch(RelfixError):
    pass


class NonConvergedTrace(RelfixError):
    pass


class NotReachable(RelfixError):
    pass


class ConditionEFailed(RelfixError):
    def __init__(self, pair):
        super().__init__(f"no element similarly comparable to both of {pair}")
        self.pair = pair


class EndpointMismatch(RelfixError):
    pass


class DegenerateOrbit(RelfixError):
    pass


class NoPathKnown(RelfixError):
    pass
