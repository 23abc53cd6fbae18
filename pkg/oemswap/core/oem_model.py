#!/usr/bin/env python3
"""
OEMSwap Opto-Electro-Mechanical Model

Linearized fluctuation dynamics of one site: a mechanical resonator coupled
to two optical cavity modes (b, c) and a microwave cavity mode (w). Builds the
drift and diffusion matrices, checks stability and solves for the stationary
intracavity covariance matrix.

State vector ordering: (q, p, X_b, Y_b, X_c, Y_c, X_w, Y_w).
"""

import logging
from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg as spla
from scipy.integrate import solve_ivp

from oemswap.core.gaussian import CovMatrix, ModeLabel
from oemswap.data.constants import C_LIGHT, HBAR, K_B, STABILITY_MARGIN
from oemswap.utils.error_handler import NumericalError, UnstableModelError, ValidationError

logger = logging.getLogger(__name__)

CAVITIES = ("b", "c", "w")
MODE_ORDER = ("m",) + CAVITIES


@dataclass(frozen=True)
class CavityParams:
    """Drive and coupling of one cavity mode (SI units, angular frequencies)."""
    wavelength: float   # drive wavelength, m
    power: float        # drive power, W
    kappa: float        # amplitude decay rate, rad/s
    detuning: float     # Delta_x, rad/s
    g: float            # single-photon coupling, rad/s

    @property
    def drive_frequency(self) -> float:
        return 2.0 * np.pi * C_LIGHT / self.wavelength


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of one opto-electro-mechanical site."""
    omega_m: float          # rad/s
    q_m: float
    mass: float             # kg
    temperature: float      # K
    cavities: Mapping[str, CavityParams]

    def __post_init__(self):
        object.__setattr__(self, "cavities", MappingProxyType(dict(self.cavities)))
        issues = self.validate()
        if issues:
            raise ValidationError("; ".join(issues))

    def validate(self) -> list:
        issues = []
        if not self.omega_m > 0:
            issues.append("omega_m must be positive")
        if not self.q_m > 1:
            issues.append("Q_m must exceed 1")
        if not self.mass > 0:
            issues.append("mass must be positive")
        if not self.temperature >= 0:
            issues.append("temperature must be non-negative")
        if set(self.cavities) != set(CAVITIES):
            issues.append(f"cavities must be exactly {CAVITIES}, got {sorted(self.cavities)}")
            return issues
        for name in CAVITIES:
            cavity = self.cavities[name]
            if not cavity.kappa > 0:
                issues.append(f"kappa_{name} must be positive")
            if not cavity.wavelength > 0:
                issues.append(f"wavelength_{name} must be positive")
            if not cavity.power >= 0:
                issues.append(f"power_{name} must be non-negative")
            if not cavity.g > 0:
                issues.append(f"g_{name} must be positive")
            if not np.isfinite(cavity.detuning):
                issues.append(f"detuning_{name} must be finite")
        return issues

    @property
    def gamma_m(self) -> float:
        return self.omega_m / self.q_m

    def with_cavity(self, name: str, **changes) -> "SystemParams":
        cavities = dict(self.cavities)
        cavities[name] = replace(cavities[name], **changes)
        return replace(self, cavities=cavities)


@dataclass(frozen=True)
class DerivedRates:
    """Steady-state semiclassical quantities derived from SystemParams."""
    gamma_m: float
    omega_0: Mapping[str, float]
    drive: Mapping[str, float]
    alpha: Mapping[str, complex]
    coupling: Mapping[str, float]
    nbar_m: float
    nbar: Mapping[str, float]
    q_mean: float
    x_zpf: float

    @property
    def nbar_w(self) -> float:
        return self.nbar["w"]

    @property
    def mean_displacement(self) -> float:
        """Static membrane displacement in metres."""
        return self.q_mean * self.x_zpf


@dataclass(frozen=True)
class LinearModel:
    """Drift A and diffusion D of the fluctuation dynamics u' = A u + n."""
    drift: np.ndarray
    diffusion: np.ndarray
    omega_m: float
    kappa: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("drift", "diffusion"):
            array = np.array(getattr(self, name), dtype=float)
            if array.shape != (8, 8):
                raise ValidationError(f"{name} must be 8x8, got {array.shape}")
            array.setflags(write=False)
            object.__setattr__(self, name, array)
        object.__setattr__(self, "kappa", MappingProxyType(dict(self.kappa)))
        if not np.allclose(self.diffusion, self.diffusion.T):
            raise ValidationError("Diffusion matrix must be symmetric")

    @property
    def noise_gain(self) -> np.ndarray:
        """Diagonal of Gamma in n = Gamma nu, nu = (0, xi, X_b^in, Y_b^in, ...)."""
        gains = [0.0, 1.0]
        for name in CAVITIES:
            gains.extend([np.sqrt(2.0 * self.kappa[name])] * 2)
        return np.array(gains)

    @property
    def input_noise(self) -> np.ndarray:
        """Symmetrized white-noise intensities of nu (diagonal)."""
        gain = self.noise_gain
        intensities = np.zeros(8)
        intensities[1] = self.diffusion[1, 1]
        intensities[2:] = np.diag(self.diffusion)[2:] / gain[2:] ** 2
        return intensities


@dataclass(frozen=True)
class StabilityReport:
    """Eigenvalues of the drift matrix and the stability verdict."""
    stable: bool
    eigenvalues: Tuple[complex, ...]
    spectral_abscissa: float
    margin: float
    offending: Tuple[complex, ...] = ()


def thermal_occupancy(omega: float, temperature: float) -> float:
    """Bose-Einstein occupancy; zero at T = 0."""
    if temperature <= 0.0:
        return 0.0
    return float(1.0 / np.expm1(HBAR * omega / (K_B * temperature)))


def derive_rates(p: SystemParams) -> DerivedRates:
    """Drive rates, intracavity amplitudes, effective couplings and occupancies."""
    omega_0, drive, alpha, coupling, nbar = {}, {}, {}, {}, {}
    for name in CAVITIES:
        cavity = p.cavities[name]
        omega_0[name] = cavity.drive_frequency
        drive[name] = float(np.sqrt(2.0 * cavity.power * cavity.kappa / (HBAR * omega_0[name])))
        alpha[name] = drive[name] / complex(cavity.kappa, cavity.detuning)
        coupling[name] = float(np.sqrt(2.0) * cavity.g * abs(alpha[name]))

    # optical modes are in their vacuum at cryogenic temperatures
    nbar["b"] = 0.0
    nbar["c"] = 0.0
    microwave = p.cavities["w"]
    nbar["w"] = thermal_occupancy(omega_0["w"] + microwave.detuning, p.temperature)

    q_mean = sum(p.cavities[x].g * abs(alpha[x]) ** 2 for x in CAVITIES) / p.omega_m

    return DerivedRates(
        gamma_m=p.gamma_m,
        omega_0=MappingProxyType(omega_0),
        drive=MappingProxyType(drive),
        alpha=MappingProxyType(alpha),
        coupling=MappingProxyType(coupling),
        nbar_m=thermal_occupancy(p.omega_m, p.temperature),
        nbar=MappingProxyType(nbar),
        q_mean=float(q_mean),
        x_zpf=float(np.sqrt(HBAR / (p.mass * p.omega_m))),
    )


def build_drift(r: DerivedRates, p: SystemParams) -> np.ndarray:
    """8x8 drift matrix of the linearized quantum Langevin equations."""
    a = np.zeros((8, 8))
    a[0, 1] = p.omega_m
    a[1, 0] = -p.omega_m
    a[1, 1] = -r.gamma_m
    for k, name in enumerate(CAVITIES):
        cavity = p.cavities[name]
        x, y = 2 + 2 * k, 3 + 2 * k
        a[x, x] = a[y, y] = -cavity.kappa
        a[x, y] = cavity.detuning
        a[y, x] = -cavity.detuning
        a[1, x] = r.coupling[name]
        a[y, 0] = r.coupling[name]
    return a


def build_diffusion(r: DerivedRates, p: SystemParams) -> np.ndarray:
    """Diagonal diffusion matrix under the Markov approximation."""
    entries = [0.0, r.gamma_m * (2.0 * r.nbar_m + 1.0)]
    for name in CAVITIES:
        entries.extend([p.cavities[name].kappa * (2.0 * r.nbar[name] + 1.0)] * 2)
    return np.diag(entries)


def build_model(p: SystemParams, rates: Optional[DerivedRates] = None) -> LinearModel:
    rates = rates or derive_rates(p)
    logger.debug(
        "Couplings G/omega_m: "
        + ", ".join(f"{x}={rates.coupling[x] / p.omega_m:.4f}" for x in CAVITIES)
        + f"; nbar_m={rates.nbar_m:.3f}, nbar_w={rates.nbar_w:.3e}"
    )
    return LinearModel(
        drift=build_drift(rates, p),
        diffusion=build_diffusion(rates, p),
        omega_m=p.omega_m,
        kappa={x: p.cavities[x].kappa for x in CAVITIES},
    )


def drift_stability(drift: np.ndarray, omega_m: float) -> StabilityReport:
    try:
        eigenvalues = spla.eigvals(drift)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Drift eigenvalue computation failed: {e}") from e

    eigenvalues = eigenvalues[np.lexsort((eigenvalues.real, eigenvalues.imag))]
    margin = STABILITY_MARGIN * omega_m
    abscissa = float(np.max(eigenvalues.real))
    offending = tuple(complex(z) for z in eigenvalues if z.real >= -margin)
    return StabilityReport(
        stable=not offending,
        eigenvalues=tuple(complex(z) for z in eigenvalues),
        spectral_abscissa=abscissa,
        margin=margin,
        offending=offending,
    )


def check_stability(m: LinearModel) -> StabilityReport:
    """Stable iff every drift eigenvalue has real part below -1e-6 omega_m."""
    report = drift_stability(m.drift, m.omega_m)
    if report.stable:
        logger.debug(f"Stable: spectral abscissa {report.spectral_abscissa / m.omega_m:.3e} omega_m")
    else:
        logger.debug(f"Unstable eigenvalues: {report.offending}")
    return report


def lyapunov_solve(drift: np.ndarray, diffusion: np.ndarray, scale: float) -> np.ndarray:
    """Solve A V + V A^T + D = 0 (Bartels-Stewart) with rates scaled by `scale`."""
    try:
        v = spla.solve_continuous_lyapunov(drift / scale, -diffusion / scale)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise NumericalError(f"Lyapunov solve failed: {e}") from e
    return 0.5 * (v + v.T)


def lyapunov_residual(m: LinearModel, v: np.ndarray) -> float:
    """||A V + V A^T + D||_F / ||D||_F."""
    residual = m.drift @ v + v @ m.drift.T + m.diffusion
    return float(np.linalg.norm(residual) / np.linalg.norm(m.diffusion))


def intracavity_labels(site: int = 1) -> Tuple[ModeLabel, ...]:
    return tuple(ModeLabel(site, role) for role in MODE_ORDER)


def solve_lyapunov(m: LinearModel) -> CovMatrix:
    """Stationary 8x8 CM of mechanics and the three cavity modes."""
    report = check_stability(m)
    if not report.stable:
        raise UnstableModelError(
            f"check_stability failed: spectral abscissa {report.spectral_abscissa:.6e} rad/s",
            report=report,
        )

    v = lyapunov_solve(m.drift, m.diffusion, m.omega_m)
    residual = lyapunov_residual(m, v)
    if residual > 1e-6:
        raise NumericalError(f"Lyapunov residual {residual:.3e} too large")
    if residual > 1e-10:
        logger.warning(f"Lyapunov residual {residual:.3e} above 1e-10")
    return CovMatrix(intracavity_labels(), v)


def integrate_covariance(
    m: LinearModel,
    t_final: Optional[float] = None,
    v0: Optional[np.ndarray] = None,
    rtol: float = 1e-10,
    atol: float = 1e-12,
) -> CovMatrix:
    """Integrate V' = A V + V A^T + D from V(0) (vacuum by default).

    Time is measured in units of 1/omega_m; by default integrates for 25
    relaxation times of the slowest mode. Independent check of solve_lyapunov.
    """
    a = m.drift / m.omega_m
    d = m.diffusion / m.omega_m
    n = a.shape[0]
    if t_final is None:
        report = check_stability(m)
        if not report.stable:
            raise UnstableModelError("Cannot integrate to a steady state of an unstable model", report=report)
        t_final = 25.0 / (abs(report.spectral_abscissa) / m.omega_m)

    jacobian = np.kron(a, np.eye(n)) + np.kron(np.eye(n), a)

    def rhs(_t, y):
        v = y.reshape(n, n)
        return (a @ v + v @ a.T + d).ravel()

    y0 = (0.5 * np.eye(n) if v0 is None else np.asarray(v0, dtype=float)).ravel()
    solution = solve_ivp(rhs, (0.0, t_final), y0, method="BDF", jac=jacobian, rtol=rtol, atol=atol)
    if not solution.success:
        raise NumericalError(f"Covariance integration failed: {solution.message}")

    v = solution.y[:, -1].reshape(n, n)
    return CovMatrix(intracavity_labels(), 0.5 * (v + v.T))
