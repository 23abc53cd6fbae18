#!/usr/bin/env python3
"""
OEMSwap Physical Constants

CODATA constants and the numerical tolerances shared across modules.
"""

# CODATA 2018, exact or recommended values
HBAR = 1.054571817e-34      # J s
K_B = 1.380649e-23          # J / K
C_LIGHT = 2.99792458e8      # m / s

# Covariance matrices
SYMMETRY_ATOL = 1e-12
PHYSICALITY_ATOL = 1e-10
PAIRING_RTOL = 1e-9
PINV_RTOL = 1e-12

# Stability margin, in units of omega_m
STABILITY_MARGIN = 1e-6

# Spectral integration
QUAD_EPSREL = 1e-9
QUAD_EPSABS = 1e-12
QUAD_LIMIT = 2000

# Strict-inequality margin for the certified verdict
CERTIFY_MARGIN = 1e-10
