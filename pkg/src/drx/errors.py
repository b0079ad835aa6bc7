"""Exception hierarchy shared by every module."""


class DrxError(Exception):
    """Base class for all library errors."""


class RegexSyntaxError(DrxError, ValueError):
    """Malformed regex text; ``position`` is the 0-based offset of the problem."""

    def __init__(self, message, position=None):
        self.message = message
        self.position = position
        where = "" if position is None else f" at position {position}"
        super().__init__(f"{message}{where}")


class ResourceLimitError(DrxError):
    """A configured state, configuration, or enumeration cap was exceeded."""


class PreconditionError(DrxError, ValueError):
    """An operation was called on an input outside its domain."""


class NotDeterministicError(PreconditionError):
    """An operation that needs a deterministic automaton got a nondeterministic one."""


class UnsupportedConstructionError(DrxError):
    """The input is inside the documented domain but hits a case the construction cannot express."""
