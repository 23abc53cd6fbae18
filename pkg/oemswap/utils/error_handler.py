#!/usr/bin/env python3
"""
OEMSwap Error Handler

Exception hierarchy, centralized error reporting and recovery for sweeps.
"""

import logging
import threading
import traceback
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Any, Dict, List, Optional


class SimulationError(Exception):
    """Base class for every error raised by the simulator."""


class ValidationError(SimulationError):
    """Input violates a precondition (bad label, unphysical CM, ...)."""


class ConfigError(ValidationError):
    """Malformed run configuration."""

    def __init__(
        self,
        message: str,
        field_path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None
    ):
        self.field_path = field_path
        self.line = line
        self.column = column
        location = []
        if line is not None:
            location.append(f"line {line}")
            if column is not None:
                location.append(f"column {column}")
        if field_path:
            location.append(f"field '{field_path}'")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")


class NumericalError(SimulationError):
    """A numerical routine failed to meet its contract."""


class IntegrationError(NumericalError):
    """Spectral integration missed its error target."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class UnstableModelError(NumericalError):
    """The linearized dynamics have no steady state."""

    def __init__(self, message: str, report: Any = None):
        super().__init__(message)
        self.report = report


class ErrorSeverity(Enum):
    """Error severity levels."""
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"


class ErrorCategory(Enum):
    """Error categories for classification."""
    CONFIGURATION = "configuration"
    VALIDATION = "validation"
    NUMERICAL = "numerical"
    STABILITY = "stability"
    FILE_SYSTEM = "file_system"
    SYSTEM = "system"


EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_ALL_UNSTABLE = 3
EXIT_IO = 4


@dataclass
class ErrorReport:
    """Detailed error report."""
    error_id: str
    timestamp: datetime
    category: ErrorCategory
    severity: ErrorSeverity
    message: str
    exception_type: str
    traceback_text: str
    context: Dict[str, Any] = field(default_factory=dict)
    recovery_suggested: bool = False
    recovered: bool = False


class ErrorRecoveryStrategy:
    """Error recovery strategy."""

    def __init__(self, name: str, can_retry: bool = True, max_retries: int = 1):
        self.name = name
        self.can_retry = can_retry
        self.max_retries = max_retries

    def execute(self, error: Exception, context: Dict[str, Any]) -> bool:
        """Execute recovery strategy. Return True if successful."""
        return False

    def can_retry_again(self, attempts: int) -> bool:
        """`attempts` counts earlier tries for the error being handled."""
        return self.can_retry and attempts < self.max_retries


class OracleFallbackRecovery(ErrorRecoveryStrategy):
    """Recompute a filtered output CM with the cascaded Lyapunov oracle.

    Expects ``model`` and ``filters`` in the context and stores the
    recovered result under ``output_cm``.
    """

    def execute(self, error: Exception, context: Dict[str, Any]) -> bool:
        if "model" not in context or "filters" not in context:
            return False

        from oemswap.core.output_spectra import output_cm_cascaded_oracle

        try:
            context["output_cm"] = output_cm_cascaded_oracle(context["model"], context["filters"])
            context["fallback"] = "cascaded_oracle"
            return True
        except SimulationError as e:
            context["recovery_error"] = str(e)
            return False


class ErrorHandler:
    """Centralized error handling with recovery strategies."""

    def __init__(self, logger: logging.Logger):
        self.logger = logger

        self.error_reports: List[ErrorReport] = []
        self.max_error_history = 100

        self.recovery_strategies: Dict[ErrorCategory, List[ErrorRecoveryStrategy]] = {
            ErrorCategory.NUMERICAL: [OracleFallbackRecovery("oracle_fallback")],
        }

        self.error_counts: Dict[str, int] = {}
        self.error_recovery_counts: Dict[str, int] = {}
        self.history_lock = threading.Lock()

    def handle_error(
        self,
        error: Exception,
        context: Optional[Dict[str, Any]] = None,
        severity: ErrorSeverity = ErrorSeverity.MEDIUM,
        category: Optional[ErrorCategory] = None,
        attempt_recovery: bool = False
    ) -> ErrorReport:
        """Handle an error, optionally attempting recovery.

        Recovery results are written back into ``context``.
        """
        context = context if context is not None else {}
        error_report = self._create_error_report(error, context, severity, category)

        self._log_error(error_report)

        if attempt_recovery:
            error_report.recovery_suggested = True
            error_report.recovered = self._attempt_recovery(error, error_report.category, context)

        with self.history_lock:
            self._update_error_statistics(error_report)
            self._store_error_report(error_report)

        return error_report

    def _create_error_report(
        self,
        error: Exception,
        context: Dict[str, Any],
        severity: ErrorSeverity,
        category: Optional[ErrorCategory]
    ) -> ErrorReport:
        error_id = f"ERR_{len(self.error_reports) + 1:04d}_{type(error).__name__}"

        if not category:
            category = self.categorize_error(error)

        return ErrorReport(
            error_id=error_id,
            timestamp=datetime.now(),
            category=category,
            severity=severity,
            message=str(error),
            exception_type=type(error).__name__,
            traceback_text=traceback.format_exc(),
            context={k: v for k, v in context.items() if isinstance(v, (str, int, float, bool))}
        )

    @staticmethod
    def categorize_error(error: Exception) -> ErrorCategory:
        """Classify an error by its type."""
        if isinstance(error, ConfigError):
            return ErrorCategory.CONFIGURATION
        if isinstance(error, ValidationError):
            return ErrorCategory.VALIDATION
        if isinstance(error, UnstableModelError):
            return ErrorCategory.STABILITY
        if isinstance(error, NumericalError):
            return ErrorCategory.NUMERICAL
        if isinstance(error, OSError):
            return ErrorCategory.FILE_SYSTEM
        return ErrorCategory.SYSTEM

    @staticmethod
    def exit_code_for(error: Exception) -> int:
        """Map an error to the CLI exit code."""
        if isinstance(error, ConfigError):
            return EXIT_CONFIG
        if isinstance(error, OSError):
            return EXIT_IO
        return EXIT_FAILURE

    def _log_error(self, error_report: ErrorReport):
        log_message = f"[{error_report.error_id}] {error_report.category.value.upper()}: {error_report.message}"

        if error_report.severity == ErrorSeverity.CRITICAL:
            self.logger.critical(f"{log_message}\n{error_report.traceback_text}")
        elif error_report.severity == ErrorSeverity.HIGH:
            self.logger.error(f"{log_message}\n{error_report.traceback_text}")
        elif error_report.severity == ErrorSeverity.MEDIUM:
            self.logger.warning(f"{log_message} | Context: {error_report.context}")
        else:
            self.logger.info(log_message)

    def _attempt_recovery(self, error: Exception, category: ErrorCategory, context: Dict[str, Any]) -> bool:
        attempts = context.setdefault("recovery_attempts", {})
        for strategy in self.recovery_strategies.get(category, []):
            used = attempts.get(strategy.name, 0)
            if not strategy.can_retry_again(used):
                continue
            attempts[strategy.name] = used + 1
            self.logger.info(f"Attempting recovery: {strategy.name} (attempt {used + 1})")
            try:
                recovered = strategy.execute(error, context)
            except Exception as recovery_error:
                self.logger.error(f"Recovery strategy error: {strategy.name} - {recovery_error}")
                context["recovery_error"] = str(recovery_error)
                recovered = False

            if recovered:
                self.logger.info(f"Recovery successful: {strategy.name}")
                with self.history_lock:
                    self.error_recovery_counts[strategy.name] = self.error_recovery_counts.get(strategy.name, 0) + 1
                return True
            self.logger.warning(f"Recovery failed: {strategy.name}")

        return False

    def _update_error_statistics(self, error_report: ErrorReport):
        error_key = f"{error_report.category.value}_{error_report.exception_type}"
        self.error_counts[error_key] = self.error_counts.get(error_key, 0) + 1

    def _store_error_report(self, error_report: ErrorReport):
        self.error_reports.append(error_report)
        if len(self.error_reports) > self.max_error_history:
            self.error_reports = self.error_reports[-self.max_error_history:]

    def get_error_summary(self) -> Dict[str, Any]:
        """Get a summary of recorded errors."""
        categories: Dict[str, int] = {}
        for report in self.error_reports:
            categories[report.category.value] = categories.get(report.category.value, 0) + 1

        attempted = len([r for r in self.error_reports if r.recovery_suggested])
        recovered = len([r for r in self.error_reports if r.recovered])

        return {
            "total_errors": len(self.error_reports),
            "error_categories": categories,
            "recovery_success_rate": recovered / max(1, attempted),
            "recovery_statistics": dict(self.error_recovery_counts),
        }

    def clear_error_history(self):
        self.error_reports.clear()
        self.error_counts.clear()
        self.error_recovery_counts.clear()

    def shutdown(self):
        """Log the final error summary."""
        summary = self.get_error_summary()
        if summary["total_errors"]:
            self.logger.info(
                f"Error summary: {summary['total_errors']} errors, "
                f"recovery success rate: {summary['recovery_success_rate']:.2%}"
            )
