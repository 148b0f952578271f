"""Exception types shared across the package."""


class QnegError(Exception):
    """Base class for all qneg errors."""


class ValidationError(QnegError, ValueError):
    """A spec object or configuration violates its invariants."""


class GuardError(QnegError, RuntimeError):
    """A numerical guard tripped: the requested computation is not trustworthy
    on the given window/precision (truncation, overflow, mass loss)."""
