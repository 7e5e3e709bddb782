"""Handles the logging of the laboratory"""
import os
import logging

logger = logging.getLogger("modules")

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LEVELS = {0: logging.WARNING, 1: logging.INFO, 2: logging.DEBUG}


def setup_logging(verbosity: int = 0, local_log: bool = False, log_path: str = os.path.join("logs", "lab.log")):
    """Configures the root logger of the package.
    If local_log is enabled, every record is also appended to the log file

    Args:
        verbosity (int, optional): number of -v flags passed on the command line. Defaults to 0.
        local_log (bool, optional): whether to also write the log to a file. Defaults to False.
        log_path (str, optional): path of the log file. Defaults to "logs/lab.log".
    """
    level = LEVELS[min(max(verbosity, 0), 2)]
    logger.setLevel(level)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    stream = logging.StreamHandler()
    stream.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(stream)

    if local_log:  # save each and every record in a log file
        os.makedirs(os.path.dirname(log_path) or ".", exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(file_handler)
    logger.propagate = False
