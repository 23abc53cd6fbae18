#!/usr/bin/env python3
"""
OEMSwap Presets

Reference parameter set of the hybrid opto-electro-mechanical sites and the
two standard sweeps run on it. Frequencies are ordinary (Hz); the filter
width is given as tau * omega_m and the filter centre in units of omega_m.
"""

MECHANICS = {
    "frequency_hz": 10.0e6,
    "quality_factor": 1.5e5,
    "mass": 10.0e-12,
    "temperature": 0.05,
}

CAVITIES = {
    "b": {"wavelength": 810.000e-9, "power": 2.0e-3, "kappa_hz": 2.5e6, "detuning_hz": -10.0e6, "g_hz": 152.0},
    "c": {"wavelength": 810.328e-9, "power": 2.1e-3, "kappa_hz": 2.5e6, "detuning_hz": 10.0e6, "g_hz": 152.0},
    "w": {"wavelength": 29.979e-3, "power": 35.0e-3, "kappa_hz": 2.5e6, "detuning_hz": 10.0e6, "g_hz": 0.266},
}

# filters sit on the cavity resonances, so Omega_x = Delta_x
FILTERS = {
    "b": {"tau": 500.0, "omega": -1.0},
    "c": {"tau": 500.0, "omega": 1.0},
    "w": {"tau": 500.0, "omega": 1.0},
}

SWEEPS = {
    "bandwidth": {"variable": "tau", "start": 50.0, "stop": 1000.0, "points": 20, "scale": "linear"},
    "power": {"variable": "power_w", "start": 1.0e-3, "stop": 60.0e-3, "points": 30, "scale": "linear"},
}

DEFAULT_SWEEP = "bandwidth"


def available_presets():
    return sorted(SWEEPS)
