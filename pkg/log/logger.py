"""
Logging module for the GritNet outcome predictor.

This module provides the application logger used by the event tokenizer,
the trainer, the adaptation procedure and the command line. Every module
asks for a child of the single ``gritnet`` logger so one configuration
controls the whole run.

The logger is configured to:
- Write to the console (stderr, so command output on stdout stays clean)
- Optionally write to a rotating log file
- Include timestamp and log level in every message
- Align the text before the first colon for readable training tables

Configuration is done through environment variables in .env file:
- GRITNET_LOG_LEVEL: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
- GRITNET_LOG_TO_CONSOLE: Whether to log to console (true/false)
- GRITNET_LOG_TO_FILE: Whether to log to file (true/false)
- GRITNET_LOG_DIR: Directory to store log files
- GRITNET_LOG_FILE: Name of the log file
- GRITNET_LOG_FILE_MAX_SIZE_BYTES: Maximum size of the log file before rotation
- GRITNET_LOG_FILE_BACKUP_COUNT: Number of backup files to keep

Usage:
    from log.logger import get_logger

    logger = get_logger("Trainer")
    logger.info("Epoch 3: loss 0.412, valid AUC 81.20")
"""

import logging
import os
import sys
from logging.handlers import RotatingFileHandler
from typing import Any, Callable, Optional

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

ROOT_LOGGER_NAME = "gritnet"


class AlignedFormatter(logging.Formatter):
    """Formatter that aligns the colon of ``key: value`` messages."""

    COLON_COLUMN = 25

    def format(self, record):
        original = super().format(record)

        parts = original.split(" - ", 2)
        if len(parts) != 3:
            return original

        timestamp_level = " - ".join(parts[:2])
        message = parts[2]
        clean_message = message.lstrip()
        indent = message[: len(message) - len(clean_message)]

        # Banners and traceback lines keep their own layout
        if ":" in clean_message and not clean_message.startswith(("=", "-", ".", ">", "<", "Traceback")):
            colon_pos = clean_message.find(":")
            before_colon = clean_message[:colon_pos].strip()
            after_colon = clean_message[colon_pos + 1:].strip()
            padding = max(0, self.COLON_COLUMN - len(indent) - len(before_colon))
            return f"{timestamp_level} - {indent}{before_colon}{' ' * padding}: {after_colon}"

        return f"{timestamp_level} - {indent}{clean_message}"


LOG_LEVEL_MAP = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}


def get_env_var(name: str, default: Any = None, type_cast: Optional[Callable[[str], Any]] = None) -> Any:
    """
    Get an environment variable with optional type casting.

    Args:
        name: Name of the environment variable
        default: Default value if the variable is not set or cannot be cast
        type_cast: Function to cast the raw string value

    Returns:
        The (cast) value of the environment variable, or the default
    """
    value = os.getenv(name)
    if value is None:
        return default
    if type_cast is not None:
        try:
            return type_cast(value)
        except (ValueError, TypeError):
            return default
    return value


def get_env_bool(name: str, default: bool = False) -> bool:
    """True if the variable is 'true', 'yes', 'y', 'on' or '1' (case-insensitive)."""
    value = os.getenv(name, str(default)).lower()
    return value in ("true", "yes", "y", "on", "1")


DEFAULT_LOG_FORMAT = "%(asctime)s - %(levelname)-8s - %(message)s"
DEFAULT_DATE_FORMAT = "%Y-%m-%d %H:%M:%S"

_logger: Optional[logging.Logger] = None


def setup_logger(
    name: str = ROOT_LOGGER_NAME,
    level: Optional[int] = None,
    log_format: str = DEFAULT_LOG_FORMAT,
    log_to_console: Optional[bool] = None,
    log_to_file: Optional[bool] = None,
    log_dir: Optional[str] = None,
    log_file: Optional[str] = None,
) -> logging.Logger:
    """
    Configure and return the application logger.

    Settings are read from the arguments, falling back to the GRITNET_LOG_*
    environment variables when an argument is left as None.

    Args:
        name: Name of the logger (default: "gritnet")
        level: Logging level (default: GRITNET_LOG_LEVEL or INFO)
        log_format: Format string for log messages
        log_to_console: Whether to log to stderr (default: GRITNET_LOG_TO_CONSOLE or True)
        log_to_file: Whether to log to a rotating file (default: GRITNET_LOG_TO_FILE or False)
        log_dir: Directory for log files (default: GRITNET_LOG_DIR or "logs")
        log_file: Name of the log file (default: GRITNET_LOG_FILE or "gritnet.log")

    Returns:
        Configured logger instance
    """
    if level is None:
        level = get_env_var("GRITNET_LOG_LEVEL", logging.INFO, lambda x: LOG_LEVEL_MAP.get(x.upper(), logging.INFO))
    if log_to_console is None:
        log_to_console = get_env_bool("GRITNET_LOG_TO_CONSOLE", True)
    if log_to_file is None:
        log_to_file = get_env_bool("GRITNET_LOG_TO_FILE", False)
    if log_dir is None:
        log_dir = get_env_var("GRITNET_LOG_DIR", "logs")
    if log_file is None:
        log_file = get_env_var("GRITNET_LOG_FILE", "gritnet.log")

    logger = logging.getLogger(name)
    logger.setLevel(level)
    logger.handlers.clear()
    logger.propagate = False

    formatter = AlignedFormatter(log_format, DEFAULT_DATE_FORMAT)

    if log_to_console:
        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

    if log_to_file:
        full_log_dir = os.path.abspath(log_dir)
        os.makedirs(full_log_dir, exist_ok=True)
        log_path = os.path.join(full_log_dir, log_file)

        max_bytes = get_env_var("GRITNET_LOG_FILE_MAX_SIZE_BYTES", 1048576, int)
        backup_count = get_env_var("GRITNET_LOG_FILE_BACKUP_COUNT", 3, int)

        file_handler = RotatingFileHandler(log_path, maxBytes=max_bytes, backupCount=backup_count)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)
        logger.debug(f"Log file: {log_path}, max size {max_bytes / 1024:.1f}KB, backups {backup_count}")

    if not logger.handlers:
        logger.addHandler(logging.NullHandler())

    logger.debug(f"Logger '{name}' initialized with level {logging.getLevelName(level)}")
    return logger


def get_logger(name: Optional[str] = None) -> logging.Logger:
    """
    Get the application logger, or a named child of it.

    Args:
        name: Optional child name. ``get_logger("Trainer")`` returns the
              ``gritnet.Trainer`` logger, which shares the root handlers.

    Returns:
        Logger instance
    """
    global _logger

    if _logger is None:
        _logger = setup_logger()

    if name:
        return logging.getLogger(f"{ROOT_LOGGER_NAME}.{name}")

    return _logger
