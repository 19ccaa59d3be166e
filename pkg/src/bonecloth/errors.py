# Area: Shared
# PRD: docs/prd-bonecloth.md
"""
bonecloth.errors — Custom exception classes
============================================

Defines the exception hierarchy for the simulator.
Each exception stores full context for structured logging.
"""

from __future__ import annotations
from typing import Any, Dict, List, Optional, Sequence

from .error_formatter import format_error_block


class BoneClothError(Exception):
    """Base exception for all bonecloth errors."""

    error_type = "BONECLOTH_ERROR"
    exit_kind = "runtime"

    def __init__(
        self,
        message: str,
        operation: str = "",
        details: Optional[Dict[str, Any]] = None,
        reasons: Optional[List[str]] = None,
    ):
        self.operation = operation
        self.details = details or {}
        self.reasons = reasons or []
        super().__init__(message)

    def format_error_log(self) -> str:
        return format_error_block(
            error_type=self.error_type,
            operation=self.operation,
            details=self.details,
            reasons=self.reasons or [str(self)],
        )


class ShapeMismatchError(BoneClothError):
    """Raised when operands of an operation have incompatible shapes."""

    error_type = "SHAPE_MISMATCH"

    def __init__(self, operation: str, shapes: Sequence[Any], expected: str = ""):
        self.shapes = [tuple(s) if s is not None else None for s in shapes]
        detail = f" (expected {expected})" if expected else ""
        super().__init__(
            f"{operation}: incompatible shapes {self.shapes}{detail}",
            operation=operation,
            details={"shapes": [list(s) if s is not None else None for s in self.shapes]},
        )


class DegenerateInputError(BoneClothError):
    """Raised when an input is geometrically degenerate (e.g. collinear 6D columns)."""

    error_type = "DEGENERATE_INPUT"

    def __init__(self, operation: str, detail: str, index: Optional[int] = None):
        self.index = index
        where = f" at index {index}" if index is not None else ""
        super().__init__(
            f"{operation}: {detail}{where}",
            operation=operation,
            details={"index": index, "detail": detail},
        )


class NonFiniteError(BoneClothError):
    """Raised when a value that must be finite is NaN or infinite."""

    error_type = "NON_FINITE"

    def __init__(self, operation: str, index: Optional[int] = None):
        self.index = index
        where = f" (first offending index {index})" if index is not None else ""
        super().__init__(
            f"{operation}: non-finite value{where}",
            operation=operation,
            details={"index": index},
        )


class TapeError(BoneClothError):
    """Raised on invalid differentiation requests (non-scalar output, consumed tape)."""

    error_type = "TAPE_ERROR"


class ConfigValidationError(BoneClothError):
    """Raised when a run config fails validation."""

    error_type = "CONFIG_VALIDATION"
    exit_kind = "validation"


class AssetValidationError(BoneClothError):
    """Raised when body, garment or pose assets are missing or inconsistent."""

    error_type = "ASSET_VALIDATION"
    exit_kind = "validation"


class FileFormatError(BoneClothError):
    """Raised when a binary file has a bad magic, version or shape header."""

    error_type = "FILE_FORMAT"
    exit_kind = "validation"

    def __init__(self, path: str, reason: str):
        self.path = path
        super().__init__(
            f"{path}: {reason}",
            operation="read",
            details={"path": path},
            reasons=[reason],
        )


class TrainingError(BoneClothError):
    """Raised when training cannot proceed (e.g. repeated non-finite losses)."""

    error_type = "TRAINING_FAILURE"


class SessionStateError(BoneClothError):
    """Raised when a runtime session is used before it was opened or after it was closed."""

    error_type = "SESSION_STATE"
