"""Exception hierarchy.

Every domain error carries its class name so the command line driver can
print a greppable ``ERR:<Name>`` line.
"""


class EndsError(Exception):
    """Base class for all domain errors raised by :mod:`lfends`."""

    @property
    def name(self):
        return type(self).__name__


class UnknownVertex(EndsError, KeyError):
    pass


class BudgetExceeded(EndsError):
    pass


class ParseError(EndsError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DisconnectedInput(EndsError, ValueError):
    pass


class NonSimpleInput(EndsError, ValueError):
    pass


class CompactumTouchesWindowBoundary(EndsError):
    pass


class WindowTooSmall(EndsError):
    def __init__(self, message, minimal_radius=None):
        if minimal_radius is not None:
            message = f"{message} (minimal admissible window radius: {minimal_radius})"
        super().__init__(message)
        self.minimal_radius = minimal_radius


class RayNotProperInWindow(EndsError):
    pass


class BadIndices(EndsError, IndexError):
    pass


class DepthOutOfRange(EndsError, IndexError):
    pass


class DepthMismatch(EndsError, ValueError):
    pass


class NotProper(EndsError):
    pass


class EmptyLevelAfterNormalization(EndsError):
    pass


class EmptyTower(EndsError):
    pass


class NotRayEfficient(EndsError):
    pass


class NonInjectiveEndMap(EndsError):
    pass


class TowerMismatch(EndsError, ValueError):
    pass


class PrefixTooShallow(EndsError):
    pass


class IncoherentPrefix(EndsError, ValueError):
    pass


class AlignmentFailure(EndsError):
    pass
