# Area: Shared
# PRD: docs/prd-bonecloth.md
"""Shared infrastructure: logging, binary IO, random streams."""

from .logging_config import setup_logging, log_error
from .logging_formatters import (
    enable_quiet_mode,
    disable_quiet_mode,
    is_quiet_mode_enabled,
)
from .binio import atomic_write_bytes, atomic_write_text, Reader, pack_array, pack_u32
from .rng import stream

__all__ = [
    "setup_logging",
    "log_error",
    "enable_quiet_mode",
    "disable_quiet_mode",
    "is_quiet_mode_enabled",
    "atomic_write_bytes",
    "atomic_write_text",
    "Reader",
    "pack_array",
    "pack_u32",
    "stream",
]
