"""Exception hierarchy.

Every error raised on bad input derives from :class:`SparePolicyError`, which
is itself a :class:`ValueError` so generic validation code keeps working.
"""


class SparePolicyError(ValueError):
    """Base class for all package errors."""


class InvalidGeometryError(SparePolicyError):
    pass


class DegenerateAlignmentError(SparePolicyError):
    """Constellation and parking planes drift at the same rate."""


class TimeStepTooCoarseError(SparePolicyError):
    pass


class InvalidTransferError(SparePolicyError):
    pass


class InvalidPropulsionError(SparePolicyError):
    pass


class InvalidAvailabilityError(SparePolicyError):
    pass


class DegenerateDemandError(SparePolicyError):
    """The parking orbit never sees demand, so it never reorders."""


class NonConvergenceError(SparePolicyError, RuntimeError):
    pass


class ConfigError(SparePolicyError):
    pass
