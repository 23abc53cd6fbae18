#!/usr/bin/env python3
"""
Shared fixtures for OEMSwap tests
"""

import json

import numpy as np
import pytest


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full parameter sweeps (minutes)")


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


@pytest.fixture
def reference_config():
    import config
    return config.RunConfig()


@pytest.fixture
def reference_params(reference_config):
    return reference_config.system_params()


@pytest.fixture
def reference_model(reference_params):
    from oemswap.core.oem_model import build_model
    return build_model(reference_params)


@pytest.fixture
def undriven_params(reference_params):
    """Reference site with every drive switched off (all couplings zero)."""
    params = reference_params
    for name in ("b", "c", "w"):
        params = params.with_cavity(name, power=0.0)
    return params


@pytest.fixture
def heating_params(reference_params):
    """Only the blue-detuned Bell cavity is driven: parametric instability."""
    return reference_params.with_cavity("c", power=0.0).with_cavity("w", power=0.0)


@pytest.fixture
def write_config(tmp_path):
    """Write a configuration mapping as JSON and return its path."""
    def _write(data, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return str(path)
    return _write


def _embed(n_modes, i, j, block):
    """Two-mode symplectic on modes i, j of an n-mode system."""
    s = np.eye(2 * n_modes)
    idx = [2 * i, 2 * i + 1, 2 * j, 2 * j + 1]
    s[np.ix_(idx, idx)] = block
    return s


def _rotation(theta):
    return np.array([[np.cos(theta), np.sin(theta)], [-np.sin(theta), np.cos(theta)]])


def _local(rng, max_squeeze):
    r = rng.uniform(-max_squeeze, max_squeeze)
    return (_rotation(rng.uniform(0, 2 * np.pi)) @ np.diag([np.exp(r), np.exp(-r)])
            @ _rotation(rng.uniform(0, 2 * np.pi)))


@pytest.fixture
def random_symplectic(rng):
    """Random n-mode symplectic built from squeezers, beam splitters and local operations."""
    def _draw(n_modes, max_squeeze=0.5, layers=2):
        s = np.eye(2 * n_modes)
        z = np.diag([1.0, -1.0])
        for _ in range(layers):
            for i in range(n_modes):
                for j in range(i + 1, n_modes):
                    r = rng.uniform(0, max_squeeze)
                    squeeze = np.block([[np.cosh(r) * np.eye(2), np.sinh(r) * z],
                                        [np.sinh(r) * z, np.cosh(r) * np.eye(2)]])
                    theta = rng.uniform(0, 2 * np.pi)
                    mix = np.block([[np.cos(theta) * np.eye(2), np.sin(theta) * np.eye(2)],
                                    [-np.sin(theta) * np.eye(2), np.cos(theta) * np.eye(2)]])
                    s = _embed(n_modes, i, j, mix) @ _embed(n_modes, i, j, squeeze) @ s
            locals_ = np.zeros((2 * n_modes, 2 * n_modes))
            for k in range(n_modes):
                locals_[2 * k:2 * k + 2, 2 * k:2 * k + 2] = _local(rng, max_squeeze)
            s = locals_ @ s
        return s
    return _draw


@pytest.fixture
def random_cm(rng, random_symplectic):
    """Random physical CM: thermal spectrum in [1/2, max_nu) dressed by a random symplectic."""
    from oemswap.core.gaussian import CovMatrix

    def _draw(labels, max_nu=2.0, max_squeeze=0.5):
        n_modes = len(labels)
        nu = rng.uniform(0.5, max_nu, n_modes)
        s = random_symplectic(n_modes, max_squeeze)
        data = s @ np.diag(np.repeat(nu, 2)) @ s.T
        return CovMatrix(labels, 0.5 * (data + data.T))
    return _draw


@pytest.fixture
def random_stable_params(rng, reference_params):
    """Stable sites drawn around the reference device."""
    from dataclasses import replace

    from oemswap.core.oem_model import build_model, check_stability

    omega_m = reference_params.omega_m

    def _draw(count):
        draws = []
        for _ in range(50 * count):
            params = replace(
                reference_params,
                q_m=10 ** rng.uniform(4.0, 6.0),
                temperature=rng.uniform(0.01, 0.2),
            )
            powers = {"b": (0.5e-3, 2.0e-3), "c": (1.5e-3, 4.0e-3), "w": (5.0e-3, 60.0e-3)}
            for name, (low, high) in powers.items():
                params = params.with_cavity(
                    name,
                    power=rng.uniform(low, high),
                    kappa=rng.uniform(0.15, 0.4) * omega_m,
                )
            report = check_stability(build_model(params))
            if report.stable and report.spectral_abscissa < -1e-3 * omega_m:
                draws.append(params)
            if len(draws) == count:
                break
        assert len(draws) == count, "not enough stable draws"
        return draws
    return _draw
