#!/usr/bin/env python3
"""
OEMSwap Sweep Runner

Evaluates the full pipeline (rates, drift, stability, filtered output CM,
entanglement swap) at every point of a one-dimensional parameter grid.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from oemswap.core.oem_model import build_model, check_stability, derive_rates
from oemswap.core.output_spectra import output_cm
from oemswap.core.swap_protocol import SiteState, evaluate, site_entanglement
from oemswap.utils.error_handler import (
    ErrorHandler,
    ErrorSeverity,
    IntegrationError,
    SimulationError,
)
from oemswap.utils.number_format import format_bool, format_float, parse_bool, parse_float

CSV_HEADER = (
    "swept_value",
    "EN_ww",
    "EN_cc",
    "mu_b",
    "mu_wb",
    "mu_bc",
    "eta_ww_shortcut",
    "eta_ww_measured",
    "stable",
    "certified",
)

_MEASURES = ("en_ww", "en_cc", "mu_b", "mu_wb", "mu_bc", "eta_ww_shortcut", "eta_ww_measured")


@dataclass
class SweepRecord:
    """Result at one grid point; measures are None when the point is unstable."""
    swept_value: float
    en_ww: Optional[float] = None
    en_cc: Optional[float] = None
    mu_b: Optional[float] = None
    mu_wb: Optional[float] = None
    mu_bc: Optional[float] = None
    eta_ww_shortcut: Optional[float] = None
    eta_ww_measured: Optional[float] = None
    stable: bool = False
    certified: bool = False
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_csv_row(self) -> List[str]:
        row = [format_float(self.swept_value)]
        row.extend(format_float(getattr(self, name)) for name in _MEASURES)
        row.extend([format_bool(self.stable), format_bool(self.certified)])
        return row

    @classmethod
    def from_csv_row(cls, row: List[str]) -> "SweepRecord":
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"Expected {len(CSV_HEADER)} columns, got {len(row)}")
        values = {name: parse_float(text) for name, text in zip(_MEASURES, row[1:8])}
        return cls(
            swept_value=parse_float(row[0]),
            stable=parse_bool(row[8]),
            certified=parse_bool(row[9]),
            **values,
        )

    def to_dict(self) -> Dict[str, Any]:
        record = {"swept_value": self.swept_value, "stable": self.stable, "certified": self.certified}
        record.update({name: getattr(self, name) for name in _MEASURES})
        record.update(self.extras)
        return record


class SweepRunner:
    """Runs a RunConfig over its sweep grid."""

    def __init__(self, config, logger: logging.Logger, error_handler: Optional[ErrorHandler] = None):
        self.config = config
        self.logger = logger
        self.error_handler = error_handler or ErrorHandler(logger)

    def grid(self) -> np.ndarray:
        sweep = self.config.sweep
        if sweep.points == 1:
            return np.array([float(sweep.start)])
        if sweep.scale == "log":
            return np.geomspace(sweep.start, sweep.stop, sweep.points)
        return np.linspace(sweep.start, sweep.stop, sweep.points)

    def preflight(self) -> List[str]:
        """Stability check at the sweep endpoints; returns one warning per unstable endpoint."""
        warnings = []
        values = self.grid()
        for value in sorted({float(values[0]), float(values[-1])}):
            point = self.config.with_value(self.config.sweep.variable, value)
            report = check_stability(build_model(point.system_params()))
            if not report.stable:
                warnings.append(
                    f"{self.config.sweep.variable}={format_float(value)} is unstable "
                    f"(spectral abscissa {report.spectral_abscissa:.6e} rad/s)"
                )
        return warnings

    def evaluate_point(self, value: float) -> SweepRecord:
        """Full pipeline at one grid value."""
        variable = self.config.sweep.variable
        point = self.config.with_value(variable, value)
        params = point.system_params()
        rates = derive_rates(params)
        model = build_model(params, rates)
        self.logger.debug(
            f"{variable}={value:.6g}: G/omega_m b={rates.coupling['b'] / params.omega_m:.4f}, "
            f"c={rates.coupling['c'] / params.omega_m:.4f}, w={rates.coupling['w'] / params.omega_m:.4f}"
        )

        report = check_stability(model)
        if not report.stable:
            self.logger.warning(
                f"{variable}={value:.6g} unstable: spectral abscissa {report.spectral_abscissa:.3e} rad/s"
            )
            return SweepRecord(swept_value=float(value), stable=False)

        filters = point.filter_specs()
        extras: Dict[str, Any] = {"spectral_abscissa": report.spectral_abscissa / params.omega_m}
        try:
            output = output_cm(model, filters)
        except IntegrationError as e:
            context = {"model": model, "filters": filters, "swept_value": float(value)}
            error_report = self.error_handler.handle_error(
                e, context, severity=ErrorSeverity.MEDIUM, attempt_recovery=True
            )
            if not error_report.recovered:
                raise
            output = context["output_cm"]
            extras["fallback"] = context["fallback"]

        site = SiteState.from_output(output)
        result = evaluate(site)
        pairs = site_entanglement(site)
        extras.update({
            "en_ww_raw": result.en_ww_raw,
            "en_cc_raw": result.en_cc_raw,
            "eta_ww_raw": result.eta_ww_raw,
            "eta_cc_raw": result.eta_cc_raw,
            "eta_cc_shortcut": result.eta_cc_shortcut,
            "eta_cc_measured": result.eta_cc_measured,
            "shortcut_discrepancy": result.shortcut_discrepancy,
            "certifying_state": result.certifying_state,
            "en_wb": pairs["wb"],
            "en_bc": pairs["bc"],
            "en_wc": pairs["wc"],
        })

        return SweepRecord(
            swept_value=float(value),
            en_ww=result.en_ww,
            en_cc=result.en_cc,
            mu_b=result.mu_b,
            mu_wb=result.mu_wb,
            mu_bc=result.mu_bc,
            eta_ww_shortcut=result.eta_ww_shortcut,
            eta_ww_measured=result.eta_ww_measured,
            stable=True,
            certified=result.certified,
            extras=extras,
        )

    def run(self, show_progress: bool = False) -> List[SweepRecord]:
        """Evaluate every grid point; records come back in grid order."""
        values = [float(v) for v in self.grid()]
        workers = max(1, int(self.config.workers))
        self.logger.info(
            f"Sweeping {self.config.sweep.variable} over {len(values)} points with {workers} worker(s)"
        )

        progress = tqdm(total=len(values), desc="sweep", unit="pt", disable=not show_progress)
        try:
            if workers == 1:
                records = []
                for value in values:
                    records.append(self.evaluate_point(value))
                    progress.update(1)
            else:
                def task(value: float) -> SweepRecord:
                    record = self.evaluate_point(value)
                    progress.update(1)
                    return record

                with ThreadPoolExecutor(max_workers=workers) as executor:
                    records = list(executor.map(task, values))
        except SimulationError:
            self.logger.error("Sweep aborted")
            raise
        finally:
            progress.close()

        stable = sum(r.stable for r in records)
        certified = sum(r.certified for r in records)
        self.logger.info(f"Sweep finished: {stable}/{len(records)} stable, {certified} certified")
        return records
