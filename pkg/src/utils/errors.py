"""Exception hierarchy shared by every qmr module."""


class QMRError(Exception):
    """Base class for all qmr errors"""


class InvalidInputError(QMRError, ValueError):
    """Input data violates a documented precondition"""


class InvalidDimensionError(InvalidInputError):
    """Vector or matrix sizes do not match the instance"""


class InvalidConfigError(InvalidInputError):
    """Solver or experiment parameters are out of range"""


class FactorizationError(QMRError):
    """Damped Newton matrix could not be factorized even after jitter"""


class InstanceFormatError(QMRError):
    """Stored instance file is unreadable or has an unknown version"""


class HarnessIOError(QMRError, OSError):
    """CSV or plot output could not be written or read"""
