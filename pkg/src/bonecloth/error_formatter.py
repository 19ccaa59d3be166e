# Area: Shared
# PRD: docs/prd-bonecloth.md
"""Error formatting for structured failure reports."""

from __future__ import annotations
import json
from typing import Any, Dict, List, Optional


def format_error_block(
    error_type: str,
    operation: str,
    details: Optional[Dict[str, Any]],
    reasons: Optional[List[str]],
) -> str:
    """Format a boxed error block for terminal and log output."""
    from datetime import datetime, timezone

    timestamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"

    lines = [
        "",
        "=" * 64,
        " BONECLOTH ERROR",
        "=" * 64,
        f" Timestamp:    {timestamp}",
        f" Error Type:   {error_type}",
        f" Operation:    {operation}",
    ]

    if details:
        lines.append("")
        lines.append(" ── DETAILS " + "─" * 52)
        lines.append(indent_json(details))

    if reasons:
        lines.append("")
        lines.append(" ── REASONS " + "─" * 52)
        for reason in reasons:
            lines.append(f" • {reason}")

    lines.append("")
    lines.append("=" * 64)
    lines.append("")

    return "\n".join(lines)


def format_error_line(kind: str, command: str, reason: str) -> str:
    """One-line machine-parsable failure record for the error stream."""
    flat = " ".join(str(reason).split())
    return f"error={kind} command={command} reason={flat}"


def indent_json(data: Dict[str, Any], indent: int = 2) -> str:
    """Format JSON with indentation for error logs."""
    try:
        formatted = json.dumps(data, indent=indent, default=str)
        return "\n".join(" " + line for line in formatted.split("\n"))
    except Exception:
        return f" {repr(data)}"
