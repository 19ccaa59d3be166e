# Area: Shared
# PRD: docs/prd-bonecloth.md
"""
bonecloth._shared.logging_config — Structured logging setup
===========================================================

Configures dual logging: terminal (colored) + file (JSON lines).
Provides the error logging used by the CLI before it exits.
"""

from __future__ import annotations
import logging
import sys
from pathlib import Path
from typing import TYPE_CHECKING

from .logging_formatters import QuietFilter, TerminalFormatter, JSONFormatter

if TYPE_CHECKING:
    from ..errors import BoneClothError

# Package logger
logger = logging.getLogger("bonecloth")


def setup_logging(
    log_file_path: str = "bonecloth.log",
    level: int = logging.INFO,
) -> None:
    """
    Configure logging for the package.

    Parameters
    ----------
    log_file_path : str
        Path to the log file. Defaults to 'bonecloth.log' in current dir.
    level : int
        Logging level. Defaults to INFO.
    """
    pkg_logger = logging.getLogger("bonecloth")
    pkg_logger.setLevel(level)

    # Remove existing handlers
    for handler in list(pkg_logger.handlers):
        pkg_logger.removeHandler(handler)
        handler.close()

    # Terminal handler with colors
    terminal_handler = logging.StreamHandler(sys.stderr)
    terminal_handler.setLevel(level)
    terminal_handler.setFormatter(TerminalFormatter(
        fmt="%(asctime)s │ %(levelname)s │ %(name)s │ %(message)s",
        datefmt="%H:%M:%S",
    ))
    terminal_handler.addFilter(QuietFilter())
    pkg_logger.addHandler(terminal_handler)

    # File handler with JSON
    try:
        log_path = Path(log_file_path)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
        file_handler.setLevel(level)
        file_handler.setFormatter(JSONFormatter())
        pkg_logger.addHandler(file_handler)
    except OSError as e:
        pkg_logger.warning(f"Could not create log file: {e}")

    # Prevent propagation to root logger
    pkg_logger.propagate = False


def log_error(error: "BoneClothError") -> None:
    """
    Log a package error in the structured format.

    The boxed report goes to the log file only; the CLI prints the
    one-line machine-parsable record on stderr itself.
    """
    logger.error(
        f"{error.__class__.__name__}: {error}",
        extra={
            "error_type": error.error_type,
            "operation": error.operation,
            "report": error.format_error_log(),
        },
    )
