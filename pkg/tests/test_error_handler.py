#!/usr/bin/env python3
"""
Tests for error handling and number formatting
"""

import logging
import math

import pytest

from oemswap.utils.error_handler import (
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_IO,
    ConfigError,
    ErrorCategory,
    ErrorHandler,
    ErrorSeverity,
    IntegrationError,
    NumericalError,
    UnstableModelError,
    ValidationError,
)
from oemswap.utils.number_format import format_bool, format_float, parse_bool, parse_float


@pytest.fixture
def handler():
    return ErrorHandler(logging.getLogger("oemswap.tests"))


def test_error_categories():
    """Errors are classified by type."""
    assert ErrorHandler.categorize_error(ConfigError("x")) == ErrorCategory.CONFIGURATION
    assert ErrorHandler.categorize_error(ValidationError("x")) == ErrorCategory.VALIDATION
    assert ErrorHandler.categorize_error(UnstableModelError("x")) == ErrorCategory.STABILITY
    assert ErrorHandler.categorize_error(IntegrationError("x")) == ErrorCategory.NUMERICAL
    assert ErrorHandler.categorize_error(FileNotFoundError("x")) == ErrorCategory.FILE_SYSTEM
    assert ErrorHandler.categorize_error(RuntimeError("x")) == ErrorCategory.SYSTEM


def test_exit_codes():
    """Exit codes follow the error class."""
    assert ErrorHandler.exit_code_for(ConfigError("x")) == EXIT_CONFIG
    assert ErrorHandler.exit_code_for(ValidationError("unphysical CM")) == EXIT_FAILURE
    assert ErrorHandler.exit_code_for(PermissionError("x")) == EXIT_IO
    assert ErrorHandler.exit_code_for(NumericalError("x")) == EXIT_FAILURE


def test_config_error_location():
    """ConfigError names line, column and field."""
    error = ConfigError("Unknown field", field_path="sweep.pionts", line=3, column=5)
    assert str(error) == "[line 3, column 5, field 'sweep.pionts'] Unknown field"
    assert str(ConfigError("plain")) == "plain"


def test_error_summary(handler):
    """Reports are stored and summarized."""
    handler.handle_error(ValidationError("bad label"), severity=ErrorSeverity.LOW)
    handler.handle_error(NumericalError("no convergence"), {"point": 3})
    summary = handler.get_error_summary()
    assert summary["total_errors"] == 2
    assert summary["error_categories"] == {"validation": 1, "numerical": 1}

    handler.clear_error_history()
    assert handler.get_error_summary()["total_errors"] == 0


def test_oracle_fallback_recovery(handler, reference_model, reference_config):
    """A failed spectral integration is recovered with the cascaded oracle."""
    context = {"model": reference_model, "filters": reference_config.filter_specs()}
    report = handler.handle_error(IntegrationError("missed target"), context, attempt_recovery=True)
    assert report.recovered
    assert context["fallback"] == "cascaded_oracle"
    assert context["output_cm"].cm.is_physical()
    assert handler.get_error_summary()["recovery_statistics"] == {"oracle_fallback": 1}


def test_recovery_without_context(handler):
    """Without a model there is nothing to fall back to."""
    report = handler.handle_error(IntegrationError("missed target"), {}, attempt_recovery=True)
    assert report.recovery_suggested
    assert not report.recovered


def test_float_formatting():
    """Floats render with twelve significant digits."""
    assert format_float(None) == ""
    assert format_float(0.0) == "0"
    assert format_float(-0.0) == "0"
    assert format_float(math.pi) == "3.14159265359"
    assert format_float(123456789012345.0) == "1.23456789012e+14"
    assert format_float(float("nan")) == "nan"
    assert parse_float("") is None
    assert parse_float(format_float(2.5e-9)) == 2.5e-9


def test_bool_formatting():
    """Booleans are lowercase words."""
    assert format_bool(True) == "true" and format_bool(False) == "false"
    assert parse_bool(" TRUE ") is True
    with pytest.raises(ValueError):
        parse_bool("yes")
