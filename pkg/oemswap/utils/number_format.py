#!/usr/bin/env python3
"""
OEMSwap Number Formatting

Deterministic text rendering of floats and booleans for result files.
"""

import math
from typing import Optional


SIGNIFICANT_DIGITS = 12


def format_float(value: Optional[float]) -> str:
    """Render a float with 12 significant digits; None becomes empty."""
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if value == 0.0:
        # avoid "-0"
        return "0"
    return format(value, f".{SIGNIFICANT_DIGITS}g")


def format_bool(value: bool) -> str:
    return "true" if value else "false"


def parse_float(text: str) -> Optional[float]:
    """Inverse of format_float."""
    text = text.strip()
    if not text:
        return None
    return float(text)


def parse_bool(text: str) -> bool:
    text = text.strip().lower()
    if text not in ("true", "false"):
        raise ValueError(f"Not a boolean: {text!r}")
    return text == "true"
