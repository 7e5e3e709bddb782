"""Errors raised by the laboratory and their mapping to exit codes"""
import logging
from typing import Optional

logger = logging.getLogger(__name__)

EXIT_CODES = {
    'success': 0,
    'operational': 1,
    'threshold': 2,
}


class LabError(Exception):
    """Base class of every error raised on purpose by the laboratory"""


class ConfigurationError(LabError):
    """The configuration (or a grid/solver built from it) is not usable

    Args:
        message (:class:`str`): description of the problem
        field (:class:`str`, optional): dotted name of the offending config key
    """

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        super().__init__(f"{field}: {message}" if field else message)


class PreconditionError(LabError):
    """An operation was called outside the hypothesis it is meant to check"""


class RangeError(LabError):
    """A dyadic block index is outside the range representable on the grid"""


class ValidationError(LabError):
    """An input does not have the property the caller declared (e.g. spectral support)"""


class DomainError(LabError):
    """A state left the domain of the entropy variables (vacuum breach)

    Args:
        message (:class:`str`): description of the problem
        index (:class:`tuple`, optional): grid index where the breach was found
    """

    def __init__(self, message: str, index: Optional[tuple] = None):
        self.index = index
        super().__init__(f"{message} at grid point {index}" if index is not None else message)


class SolverError(LabError):
    """A time integration failed

    Args:
        message (:class:`str`): description of the problem
        s (:class:`float`): slow time at which the failure was detected
        partial (:class:`object`, optional): whatever was computed before the failure
    """

    def __init__(self, message: str, s: float, partial: object = None):
        self.s = s
        self.partial = partial
        super().__init__(f"{message} (s = {s:.6g})")


def error_handler(exc: BaseException) -> int:
    """Logs the error and returns the exit code the command line should use

    Args:
        exc (BaseException): error that stopped the command

    Returns:
        int: exit code, always the operational one
    """
    if isinstance(exc, LabError):
        logger.error("%s: %s", type(exc).__name__, exc)
    else:
        logger.exception("Unexpected failure: %s", exc)
    return EXIT_CODES['operational']
