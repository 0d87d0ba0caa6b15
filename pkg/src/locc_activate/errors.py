"""Exception hierarchy shared by every module."""


class LoccError(Exception):
    """Base class for all errors raised by :mod:`locc_activate`."""


class InputError(LoccError, ValueError):
    """Invalid arguments: out-of-range digits, layout mismatch, bad params."""


class CompletenessError(InputError):
    """A set of projectors does not resolve the identity on its target."""

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class PreconditionError(LoccError):
    """An operation's documented precondition does not hold for its input."""


class ProtocolError(LoccError):
    """Base class for protocol-file problems."""


class ProtocolSyntaxError(ProtocolError):
    def __init__(self, message, line, col):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class ProtocolValidationError(ProtocolError):
    """Structurally valid text describing an invalid protocol tree.

    ``kind`` is one of ``"coverage"``, ``"locality"``, ``"reference"``,
    ``"layout"``.
    """

    def __init__(self, message, kind, line=None, col=None):
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(f"{where}{kind} error: {message}")
        self.kind = kind
        self.line = line
        self.col = col
