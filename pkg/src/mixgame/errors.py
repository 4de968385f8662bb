"""Exception types shared across the package."""


class MixgameError(Exception):
    """Base class for all package errors."""


class ValidationError(MixgameError, ValueError):
    """Bad user input: malformed matrix, config field out of range, etc."""


class ModelError(MixgameError):
    """A model is structurally unusable (e.g. no unique stationary law)."""


class SizeError(MixgameError):
    """An exact enumeration would exceed its configured cap."""


class ProtocolError(MixgameError):
    """An online learner violated the game protocol (non-simplex play)."""


class ConsistencyError(MixgameError):
    """An exact algebraic identity failed beyond tolerance."""
