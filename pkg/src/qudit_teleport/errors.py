"""Exception types raised across the package."""


class TeleportError(Exception):
    """Base class for every error raised by qudit_teleport."""


class DimensionError(TeleportError, ValueError):
    pass


class DegenerateInputError(TeleportError, ValueError):
    """Zero matrix or zero vector where a normalizable object is required."""


class ValidationError(TeleportError, ValueError):
    pass


class SizeError(TeleportError, ValueError):
    """Joint Hilbert space too large to hold as a dense vector."""


class DegenerateStateError(TeleportError, ValueError):
    """Every measurement branch has vanishing probability."""


class FeasibilityError(TeleportError):
    """The resource cannot teleport a state of the requested dimension.

    The Schmidt spectrum of the offending resource is kept on
    ``lambdas`` so callers can report it.
    """

    def __init__(self, message, lambdas=()):
        super().__init__(message)
        self.lambdas = tuple(float(x) for x in lambdas)


class ProtocolError(TeleportError):
    """Malformed frame: wrong magic or unsupported version."""


class CorruptionError(TeleportError):
    """Frame checksum does not match its payload."""


class IncompleteFrameError(TeleportError):
    pass


class SessionError(TeleportError):
    """The classical leg of a session did not complete."""
