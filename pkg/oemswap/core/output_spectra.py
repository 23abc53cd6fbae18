#!/usr/bin/env python3
"""
OEMSwap Output Spectra

Stationary covariance matrix of the temporally filtered output fields of
the three cavities, computed by integrating the filtered output spectrum
over frequency. A cascaded Lyapunov solve, where each filter is a fictitious
lossy cavity fed by the output field, gives an independent result.

Fourier convention: f(w) = integral dt exp(i w t) f(t). The causal filter
h(t) = sqrt(2/tau) exp(-(1/tau + i Omega) t) has
h(w) = sqrt(2/tau) / (1/tau - i (w - Omega)).
"""

import logging
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Dict, Mapping, NamedTuple, Tuple, Union

import numpy as np
import scipy.linalg as spla
from scipy.integrate import quad_vec

from oemswap.core.gaussian import CovMatrix, ModeLabel
from oemswap.core.oem_model import (
    CAVITIES,
    LinearModel,
    check_stability,
    drift_stability,
    lyapunov_solve,
)
from oemswap.data.constants import QUAD_EPSABS, QUAD_EPSREL, QUAD_LIMIT
from oemswap.utils.error_handler import (
    IntegrationError,
    UnstableModelError,
    ValidationError,
)

logger = logging.getLogger(__name__)

OUTPUT_LABELS = tuple(ModeLabel(1, role) for role in CAVITIES)

# per-channel ladder basis (a, a^dagger) = U (X, Y)
_LADDER = np.array([[1.0, 1.0j], [1.0, -1.0j]]) / np.sqrt(2.0)
_LADDER_INV = np.linalg.inv(_LADDER)
_U = spla.block_diag(*([_LADDER] * len(CAVITIES)))
_U_INV = spla.block_diag(*([_LADDER_INV] * len(CAVITIES)))

_UPPER = np.triu_indices(2 * len(CAVITIES))


@dataclass(frozen=True)
class FilterSpec:
    """Exponential time-window filter: width tau (s), central frequency omega (rad/s)."""
    tau: float
    omega: float

    def __post_init__(self):
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValidationError(f"Filter width tau must be positive and finite, got {self.tau!r}")
        if not np.isfinite(self.omega):
            raise ValidationError(f"Filter frequency must be finite, got {self.omega!r}")


class TransferMatrices(NamedTuple):
    intracavity: np.ndarray  # M(w), 8x8
    output: np.ndarray       # T(w), 6x8 from nu to output quadratures


@dataclass(frozen=True)
class OutputCM:
    """Filtered output CM over modes (b1, c1, w1) with integration diagnostics."""
    cm: CovMatrix
    filters: Mapping[str, FilterSpec]
    diagnostics: Mapping[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cm": self.cm.to_dict(),
            "filters": {x: {"tau": f.tau, "omega": f.omega} for x, f in sorted(self.filters.items())},
            "diagnostics": dict(self.diagnostics),
        }


def filter_transfer(f: FilterSpec, omega: Union[float, np.ndarray]):
    """Frequency response h(w) of the filter; peaks at w = f.omega with |h| = sqrt(2 tau)."""
    return np.sqrt(2.0 / f.tau) / (1.0 / f.tau - 1j * (np.asarray(omega) - f.omega))


def _check_filters(filters: Mapping[str, FilterSpec]):
    if set(filters) != set(CAVITIES):
        raise ValidationError(f"Filters needed for channels {CAVITIES}, got {sorted(filters)}")


def _output_selector(m: LinearModel) -> np.ndarray:
    """K: output quadratures pick sqrt(2 kappa_x) times the intracavity quadratures."""
    k = np.zeros((6, 8))
    for i, name in enumerate(CAVITIES):
        gain = np.sqrt(2.0 * m.kappa[name])
        k[2 * i, 2 + 2 * i] = gain
        k[2 * i + 1, 3 + 2 * i] = gain
    return k


def _input_selector() -> np.ndarray:
    """P_in: the input-noise quadratures reflected into the outputs."""
    p = np.zeros((6, 8))
    p[:, 2:] = np.eye(6)
    return p


def frequency_transfer(m: LinearModel, omega: float) -> TransferMatrices:
    """M(w) = (-i w I - A)^-1 and the output transfer T(w) = K M(w) Gamma - P_in."""
    resolvent = -1j * omega * np.eye(8) - m.drift
    try:
        intracavity = np.linalg.solve(resolvent, np.eye(8))
    except np.linalg.LinAlgError as e:
        raise IntegrationError(f"Singular resolvent at w = {omega!r}: {e}") from e
    output = _output_selector(m) @ (intracavity * m.noise_gain) - _input_selector()
    return TransferMatrices(intracavity, output)


def _integration_window(m: LinearModel, filters: Mapping[str, FilterSpec]) -> Tuple[float, np.ndarray]:
    """Half-width of the central interval and interior breakpoints, in units of omega_m."""
    scale = m.omega_m
    widest = max(abs(f.omega) for f in filters.values())
    shortest = min(f.tau for f in filters.values())
    half_width = widest + max(40.0 / shortest, 20.0 * max(m.kappa.values()), 4.0 * scale)
    half_width /= scale

    eigen_frequencies = np.abs(np.imag(drift_stability(m.drift, m.omega_m).eigenvalues)) / scale
    points = [f.omega / scale for f in filters.values()]
    points.extend(eigen_frequencies)
    points.extend(-eigen_frequencies)
    points = np.unique(np.round(points, 12))
    points = points[np.abs(points) < half_width]
    return half_width, points


def output_cm(m: LinearModel, filters: Mapping[str, FilterSpec]) -> OutputCM:
    """Filtered output CM by frequency integration of F(w) D_nu F(w)^dagger / 2 pi."""
    _check_filters(filters)
    report = check_stability(m)
    if not report.stable:
        raise UnstableModelError("Output spectra need a stable model", report=report)

    scale = m.omega_m
    noise = m.input_noise
    specs = [filters[x] for x in CAVITIES]

    def spectral_density(x: float) -> np.ndarray:
        omega = scale * x
        transfer = frequency_transfer(m, omega).output
        h = np.empty(6, dtype=complex)
        for i, spec in enumerate(specs):
            h[2 * i] = filter_transfer(spec, omega)
            h[2 * i + 1] = np.conj(filter_transfer(spec, -omega))
        filtered = _U_INV @ (h[:, None] * (_U @ transfer))
        density = (filtered * noise) @ filtered.conj().T
        return (scale / (2.0 * np.pi)) * density.real[_UPPER]

    half_width, points = _integration_window(m, filters)
    options = dict(epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL, norm="max", limit=QUAD_LIMIT, full_output=True)

    total = np.zeros(len(_UPPER[0]))
    diagnostics: Dict[str, Any] = {
        "method": "spectral",
        "window": half_width * scale,
        "breakpoints": len(points),
        "error_estimate": 0.0,
        "neval": 0,
        "intervals": 0,
    }
    pieces = (
        ("central", -half_width, half_width, {"points": points} if len(points) else {}),
        ("upper_tail", half_width, np.inf, {}),
        ("lower_tail", -np.inf, -half_width, {}),
    )
    for name, lower, upper, extra in pieces:
        try:
            value, error, info = quad_vec(spectral_density, lower, upper, **options, **extra)
        except (np.linalg.LinAlgError, ValueError) as e:
            raise IntegrationError(f"Spectral integration failed on {name}: {e}", diagnostics) from e

        diagnostics["error_estimate"] += float(error)
        diagnostics["neval"] += int(info.neval)
        diagnostics["intervals"] += len(info.intervals)
        if not info.success:
            diagnostics["failed_piece"] = name
            raise IntegrationError(
                f"Spectral integration did not converge on {name} (status {info.status}, "
                f"error estimate {error:.3e})",
                diagnostics,
            )
        total += value

    data = np.zeros((6, 6))
    data[_UPPER] = total
    data = data + np.triu(data, 1).T

    cm = CovMatrix(OUTPUT_LABELS, data)
    min_nu = cm.min_symplectic_eigenvalue()
    diagnostics["min_symplectic_eigenvalue"] = float(min_nu)
    if min_nu < 0.5 - 1e-6:
        raise IntegrationError(
            f"Filtered output CM violates uncertainty (min symplectic eigenvalue {min_nu:.9f})",
            diagnostics,
        )

    logger.debug(
        f"Spectral output CM: {diagnostics['neval']} evaluations, "
        f"error estimate {diagnostics['error_estimate']:.3e}"
    )
    return OutputCM(cm, MappingProxyType(dict(filters)), MappingProxyType(diagnostics))


def output_cm_cascaded_oracle(m: LinearModel, filters: Mapping[str, FilterSpec]) -> OutputCM:
    """Filtered output CM from a 14x14 Lyapunov equation.

    Each filter is a mode with decay 1/tau and detuning Omega driven by the
    output field sqrt(2 kappa) u_x - nu_x of its cavity.
    """
    _check_filters(filters)
    report = check_stability(m)
    if not report.stable:
        raise UnstableModelError("Output spectra need a stable model", report=report)

    n = 8 + 2 * len(CAVITIES)
    drift = np.zeros((n, n))
    drift[:8, :8] = m.drift

    gain = m.noise_gain
    coupling = np.zeros((n, 8))
    coupling[:8, :8] = np.diag(gain)

    for i, name in enumerate(CAVITIES):
        spec = filters[name]
        rate = np.sqrt(2.0 / spec.tau)
        f = 8 + 2 * i
        drift[f:f + 2, f:f + 2] = [[-1.0 / spec.tau, spec.omega], [-spec.omega, -1.0 / spec.tau]]
        for q in (0, 1):
            drift[f + q, 2 + 2 * i + q] = rate * np.sqrt(2.0 * m.kappa[name])
            coupling[f + q, 2 + 2 * i + q] = -rate

    diffusion = (coupling * m.input_noise) @ coupling.T
    v = lyapunov_solve(drift, diffusion, m.omega_m)

    residual = np.linalg.norm(drift @ v + v @ drift.T + diffusion) / np.linalg.norm(diffusion)
    diagnostics = {"method": "cascaded_oracle", "residual": float(residual)}
    if residual > 1e-8:
        raise IntegrationError(f"Cascaded Lyapunov residual {residual:.3e} too large", diagnostics)

    return OutputCM(
        CovMatrix(OUTPUT_LABELS, v[8:, 8:]),
        MappingProxyType(dict(filters)),
        MappingProxyType(diagnostics),
    )
