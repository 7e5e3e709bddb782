"""Modules that handle logging and errors"""
from .log_manager import logger, setup_logging
from .errors import EXIT_CODES, LabError, ConfigurationError, PreconditionError, RangeError, ValidationError, \
    DomainError, SolverError, error_handler
