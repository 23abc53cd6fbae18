#!/usr/bin/env python3
"""
Tests for sweeps and result files
"""

import json
import logging

import numpy as np
import pytest

import config
from oemswap.commands.record_writer import read_csv, render_csv, render_json, write_records
from oemswap.commands.sweep_runner import CSV_HEADER, SweepRecord, SweepRunner
from oemswap.utils.error_handler import ErrorHandler


@pytest.fixture
def logger():
    return logging.getLogger("oemswap.tests")


def make_runner(run_config, logger):
    return SweepRunner(run_config, logger, ErrorHandler(logger))


def heating_config():
    run_config = config.RunConfig()
    run_config.system.cavities["c"].power = 0.0
    run_config.system.cavities["w"].power = 0.0
    run_config.sweep = config.SweepConfig(variable="tau", start=100.0, stop=200.0, points=3)
    return run_config


def single_point_config(**sweep):
    run_config = config.RunConfig()
    run_config.sweep = config.SweepConfig(**{"variable": "tau", "start": 500.0, "stop": 500.0,
                                             "points": 1, **sweep})
    return run_config


def test_csv_header():
    """Header line is fixed."""
    text = render_csv([])
    assert text == (
        "swept_value,EN_ww,EN_cc,mu_b,mu_wb,mu_bc,eta_ww_shortcut,eta_ww_measured,stable,certified\n"
    )


def test_unstable_record_row():
    """Unstable points keep their swept value and leave measures empty."""
    row = SweepRecord(swept_value=0.035).to_csv_row()
    assert row == ["0.035", "", "", "", "", "", "", "", "false", "false"]


def test_number_formatting():
    """Twelve significant digits, lowercase booleans."""
    record = SweepRecord(swept_value=1.0 / 3.0, en_ww=0.0, en_cc=1.5e-7, mu_b=0.25, mu_wb=0.5,
                         mu_bc=0.3, eta_ww_shortcut=0.2, eta_ww_measured=0.2,
                         stable=True, certified=True)
    row = record.to_csv_row()
    assert row[0] == "0.333333333333"
    assert row[1] == "0"
    assert row[2] == "1.5e-07"
    assert row[-2:] == ["true", "true"]


def test_csv_round_trip(tmp_path):
    """Reading a written CSV gives back the same rows."""
    records = [
        SweepRecord(swept_value=50.0, en_ww=0.12345678901234, en_cc=0.01, mu_b=0.2, mu_wb=0.6,
                    mu_bc=0.4, eta_ww_shortcut=0.166, eta_ww_measured=0.166, stable=True,
                    certified=True),
        SweepRecord(swept_value=100.0),
    ]
    path = write_records(records, str(tmp_path / "out.csv"))
    parsed = read_csv(str(path))
    assert [r.to_csv_row() for r in parsed] == [r.to_csv_row() for r in records]
    assert parsed[1].en_ww is None and not parsed[1].stable


def test_read_csv_rejects_foreign_header(tmp_path):
    """Only files with the sweep header are accepted."""
    path = tmp_path / "other.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValueError):
        read_csv(str(path))


def test_json_is_deterministic():
    """Sorted keys and no timestamps: identical input, identical text."""
    records = [SweepRecord(swept_value=1.0, extras={"zeta": 1, "alpha": 2})]
    first = render_json(records, {"b": 1, "a": 2})
    assert first == render_json(records, {"b": 1, "a": 2})
    document = json.loads(first)
    assert document["columns"] == list(CSV_HEADER)
    assert list(document["records"][0]) == sorted(document["records"][0])


def test_grid(logger):
    """Linear, log and single-point grids."""
    run_config = config.RunConfig()
    run_config.sweep = config.SweepConfig(variable="tau", start=50.0, stop=1000.0, points=20)
    grid = make_runner(run_config, logger).grid()
    assert len(grid) == 20 and grid[0] == 50.0 and grid[-1] == 1000.0
    assert np.allclose(np.diff(grid), 50.0)

    run_config.sweep = config.SweepConfig(variable="tau", start=10.0, stop=1000.0, points=3, scale="log")
    assert np.allclose(make_runner(run_config, logger).grid(), [10.0, 100.0, 1000.0])

    run_config.sweep = config.SweepConfig(variable="power_w", start=0.02, stop=0.01, points=1)
    assert list(make_runner(run_config, logger).grid()) == [0.02]


def test_unstable_sweep(logger):
    """Every point unstable: records are flagged, not raised."""
    records = make_runner(heating_config(), logger).run()
    assert len(records) == 3
    assert not any(r.stable for r in records)
    assert all(r.en_ww is None for r in records)
    assert [r.swept_value for r in records] == [100.0, 150.0, 200.0]


def test_preflight_reports_unstable_endpoints(logger):
    """Pre-flight flags both unstable endpoints."""
    warnings = make_runner(heating_config(), logger).preflight()
    assert len(warnings) == 2
    assert all("unstable" in w for w in warnings)


def test_single_point_is_deterministic(logger, tmp_path):
    """Two runs of the same configuration write identical bytes."""
    outputs = []
    for name in ("first.csv", "second.csv"):
        records = make_runner(single_point_config(), logger).run()
        outputs.append(write_records(records, str(tmp_path / name)).read_bytes())
    assert outputs[0] == outputs[1]

    record = read_csv(str(tmp_path / "first.csv"))[0]
    assert record.stable
    assert 0.0 < record.mu_b <= 1.0
    assert record.eta_ww_measured == pytest.approx(record.eta_ww_shortcut, abs=1e-8)


def test_parallel_matches_serial(logger):
    """Thread pool keeps grid order and results."""
    serial_config = heating_config()
    parallel_config = heating_config()
    parallel_config.workers = 3
    serial = make_runner(serial_config, logger).run()
    parallel = make_runner(parallel_config, logger).run()
    assert [r.to_csv_row() for r in serial] == [r.to_csv_row() for r in parallel]


def test_json_extras(logger):
    """JSON records carry the raw route and pair negativities."""
    records = make_runner(single_point_config(), logger).run()
    document = json.loads(render_json(records))
    record = document["records"][0]
    for key in ("en_ww_raw", "eta_cc_measured", "en_wb", "en_bc", "certifying_state"):
        assert key in record
    assert record["certifying_state"] == record["certified"]
    assert abs(record["en_ww_raw"] - record["en_ww"]) < 1e-7
    assert abs(record["en_cc_raw"] - record["en_cc"]) < 1e-7


def test_parallel_fallback_recovers_every_point(logger, monkeypatch):
    """Concurrent integration failures each fall back to the cascaded oracle."""
    import time

    from oemswap.commands import sweep_runner
    from oemswap.core import output_spectra
    from oemswap.utils.error_handler import IntegrationError

    def failing_output_cm(model, filters):
        raise IntegrationError("forced")

    oracle = output_spectra.output_cm_cascaded_oracle

    def slow_oracle(model, filters):
        time.sleep(0.2)
        return oracle(model, filters)

    monkeypatch.setattr(sweep_runner, "output_cm", failing_output_cm)
    monkeypatch.setattr(output_spectra, "output_cm_cascaded_oracle", slow_oracle)

    run_config = single_point_config(start=100.0, stop=400.0, points=4)
    run_config.workers = 4
    handler = ErrorHandler(logger)
    records = SweepRunner(run_config, logger, handler).run()

    assert [r.swept_value for r in records] == [100.0, 200.0, 300.0, 400.0]
    assert all(r.stable for r in records)
    assert all(r.extras["fallback"] == "cascaded_oracle" for r in records)
    assert handler.get_error_summary()["recovery_statistics"] == {"oracle_fallback": 4}


@pytest.mark.slow
def test_reference_point_is_certified(logger):
    """Reference parameters at 50 mK and tau omega_m = 500 certify the swap."""
    record = make_runner(single_point_config(), logger).run()[0]
    assert record.stable
    assert record.certified
    assert record.en_ww > record.en_cc > 0


def sweep(variable, start, stop, points, temperature, logger, workers=4):
    run_config = config.RunConfig()
    run_config.system.temperature = temperature
    run_config.workers = workers
    run_config.sweep = config.SweepConfig(variable=variable, start=start, stop=stop, points=points)
    return make_runner(run_config, logger).run()


@pytest.mark.slow
def test_narrow_filters_increase_entanglement(logger):
    """At 50 mK both negativities grow with tau and stay ordered."""
    records = sweep("tau", 50.0, 1000.0, 8, 0.05, logger)
    assert all(r.stable for r in records)
    assert all(r.en_ww > r.en_cc > 0 for r in records)
    for earlier, later in zip(records, records[1:]):
        assert later.en_ww >= earlier.en_ww - 1e-4
        assert later.en_cc >= earlier.en_cc - 1e-4


@pytest.mark.slow
def test_warmer_bath_lowers_entanglement(logger):
    """At 100 mK entanglement drops by a few percent at every tau and stays certified.

    The reference device has a thermal cooperativity near 100 and about 1e-2
    microwave bath photons at 100 mK.
    """
    cold = sweep("tau", 50.0, 1000.0, 6, 0.05, logger)
    warm = sweep("tau", 50.0, 1000.0, 6, 0.1, logger)
    assert all(w.stable for w in warm)
    for c, w in zip(cold, warm):
        assert w.en_ww < c.en_ww
        assert w.en_ww > 0.9 * c.en_ww
        assert w.certified


@pytest.mark.slow
def test_microwave_power_threshold(logger):
    """At 100 mK certification switches on once, above a threshold power."""
    records = sweep("power_w", 1.0e-3, 60.0e-3, 12, 0.1, logger)
    stable = [r for r in records if r.stable]
    flags = [r.certified for r in stable]
    assert not flags[0] and flags[-1]
    assert sum(1 for a, b in zip(flags, flags[1:]) if a != b) == 1

    rising = [r for r in stable if r.swept_value <= 50.0e-3]
    for earlier, later in zip(rising, rising[1:]):
        assert later.en_ww >= earlier.en_ww - 1e-4
    # EN_ww peaks near 52 mW and falls off towards 60 mW
    assert stable[-1].en_ww < max(r.en_ww for r in stable)

    falling = sum(1 for a, b in zip(stable, stable[1:]) if b.en_cc <= a.en_cc + 1e-4)
    assert falling >= 0.8 * (len(stable) - 1)
