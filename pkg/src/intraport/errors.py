"""Exception types shared across the package."""


class IntraportError(Exception):
    """Base class for all package errors."""


class InvalidInput(IntraportError):
    pass


class NotNormalized(IntraportError):
    pass


class ChannelOutOfRange(IntraportError):
    pass


class InvalidGate(IntraportError):
    pass


class ShapeMismatch(IntraportError):
    pass


class ImpossibleBranch(IntraportError):
    """Raised when a projective branch has (numerically) zero probability."""

    def __init__(self, message: str, probability: float = 0.0):
        super().__init__(message)
        self.probability = probability


class UnsupportedSize(IntraportError):
    pass


class InvalidLayout(IntraportError):
    pass


class UnknownScenario(IntraportError):
    pass
