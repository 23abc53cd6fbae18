#!/usr/bin/env python3
"""
OEMSwap - Main Entry Point

Entanglement swapping between hybrid opto-electro-mechanical sites:
sweeps a physical parameter, computes the filtered output states of each
site and reports the swapped microwave and optical entanglement together
with the certifying condition.

License: MIT
"""

import argparse
import logging
import sys
from typing import List, Optional

from colorama import Fore, Style, just_fix_windows_console

from config import RunConfig, check_dependencies, setup_logging
from oemswap import __version__
from oemswap.commands.record_writer import write_records
from oemswap.commands.sweep_runner import SweepRecord, SweepRunner
from oemswap.data import presets
from oemswap.utils.error_handler import (
    EXIT_ALL_UNSTABLE,
    EXIT_CONFIG,
    EXIT_FAILURE,
    EXIT_IO,
    EXIT_OK,
    ConfigError,
    ErrorHandler,
    ErrorSeverity,
    SimulationError,
)


class OEMSwap:
    """Main application orchestrator."""

    def __init__(self, config_path: Optional[str] = None, config: Optional[RunConfig] = None,
                 verbose: bool = False):
        """Load configuration and set up logging; ConfigError propagates."""
        if config is None:
            config = RunConfig.load_from_file(config_path) if config_path else RunConfig()
        self.config = config
        if verbose:
            self.config.log_level = "DEBUG"
        self.logger = setup_logging(self.config)
        self.error_handler = ErrorHandler(self.logger)
        self.runner: Optional[SweepRunner] = None

    def initialize(self) -> List[str]:
        """Validate the configuration and build the sweep runner; returns issues."""
        issues = self.config.validate()
        if issues:
            return issues

        missing = [name for name, ok in check_dependencies().items() if not ok]
        if missing:
            return [f"Missing dependency: {name}" for name in missing]

        self.runner = SweepRunner(self.config, self.logger, self.error_handler)
        return []

    def validate(self) -> int:
        """Schema and physics sanity checks without running the sweep."""
        issues = self.initialize()
        if issues:
            for issue in issues:
                print(f"error: {issue}", file=sys.stderr)
            return EXIT_CONFIG

        warnings = self.runner.preflight()
        for warning in warnings:
            print(f"warning: {warning}", file=sys.stderr)

        endpoints = 1 if self.config.sweep.points == 1 else 2
        if len(warnings) == endpoints:
            print("invalid: every sweep endpoint is unstable")
            return EXIT_ALL_UNSTABLE

        print(f"valid: {self.config.sweep.points} point(s) over {self.config.sweep.variable}")
        return EXIT_OK

    def run(self, out: Optional[str] = None, fmt: Optional[str] = None,
            workers: Optional[int] = None, show_progress: bool = True) -> int:
        """Run the sweep and write the result file."""
        if out:
            self.config.output.path = out
        if fmt:
            self.config.output.format = fmt
        if workers:
            self.config.workers = workers

        issues = self.initialize()
        if issues:
            for issue in issues:
                print(f"error: {issue}", file=sys.stderr)
            return EXIT_CONFIG

        self.logger.info(f"Starting OEMSwap {__version__}")
        try:
            records = self.runner.run(show_progress=show_progress)
        except SimulationError as e:
            self.error_handler.handle_error(e, severity=ErrorSeverity.HIGH)
            return ErrorHandler.exit_code_for(e)

        try:
            path = write_records(records, self.config.output.path, self.config.output.format,
                                 self.config.to_dict())
        except OSError as e:
            self.error_handler.handle_error(e, severity=ErrorSeverity.HIGH)
            return EXIT_IO

        self.logger.info(f"Wrote {len(records)} record(s) to {path}")
        print(self.summary(records))

        if not any(r.stable for r in records):
            return EXIT_ALL_UNSTABLE
        return EXIT_OK

    def summary(self, records: List[SweepRecord]) -> str:
        stable = sum(r.stable for r in records)
        certified = sum(r.certified for r in records)
        line = f"{len(records)} points: {stable} stable, {certified} certified"
        if not sys.stdout.isatty():
            return line
        colour = Fore.GREEN if certified else (Fore.YELLOW if stable else Fore.RED)
        return f"{colour}{line}{Style.RESET_ALL}"

    def shutdown(self):
        self.error_handler.shutdown()
        for handler in self.logger.handlers:
            handler.flush()


def init_config(path: str, preset: str) -> int:
    """Write a default configuration for a preset sweep."""
    try:
        config = RunConfig.from_preset(preset)
        config.save_to_file(path)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    print(f"Wrote {preset} configuration to {path}")
    return EXIT_OK


def create_argument_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        prog="oemswap",
        description="Entanglement swapping between opto-electro-mechanical sites",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py init run.json --preset power   # Write a microwave power sweep config
  python main.py validate run.json              # Check a configuration
  python main.py run run.json --out power.csv   # Run the sweep
  python main.py run run.json --format json --workers 4
        """
    )

    parser.add_argument(
        "--verbose", "-v",
        action="store_true",
        help="Enable verbose logging (DEBUG level)"
    )

    parser.add_argument(
        "--version",
        action="version",
        version=f"oemswap {__version__}"
    )

    subparsers = parser.add_subparsers(dest="command", required=True)

    run_parser = subparsers.add_parser("run", help="Run a parameter sweep")
    run_parser.add_argument("config", help="Path to configuration file (JSON or YAML)")
    run_parser.add_argument("--out", "-o", help="Output file (overrides output.path)")
    run_parser.add_argument("--format", "-f", choices=("csv", "json"), help="Output format")
    run_parser.add_argument("--workers", "-w", type=int, help="Grid points evaluated in parallel")
    run_parser.add_argument("--no-progress", action="store_true", help="Hide the progress bar")

    validate_parser = subparsers.add_parser("validate", help="Validate a configuration")
    validate_parser.add_argument("config", help="Path to configuration file (JSON or YAML)")

    init_parser = subparsers.add_parser("init", help="Write a default configuration")
    init_parser.add_argument("path", help="Where to write the configuration")
    init_parser.add_argument(
        "--preset",
        choices=presets.available_presets(),
        default=presets.DEFAULT_SWEEP,
        help="Sweep preset"
    )

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the OEMSwap application."""
    parser = create_argument_parser()
    args = parser.parse_args(argv)
    just_fix_windows_console()

    if args.command == "init":
        return init_config(args.path, args.preset)

    try:
        app = OEMSwap(config_path=args.config, verbose=args.verbose)
    except ConfigError as e:
        print(f"error: {args.config}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO

    try:
        if args.command == "validate":
            return app.validate()
        return app.run(
            out=args.out,
            fmt=args.format,
            workers=args.workers,
            show_progress=not args.no_progress,
        )
    except KeyboardInterrupt:
        print("\nOEMSwap stopped by user", file=sys.stderr)
        return EXIT_FAILURE
    except Exception as e:
        logging.getLogger("oemswap").exception(f"Fatal error: {e}")
        return EXIT_FAILURE
    finally:
        app.shutdown()


if __name__ == "__main__":
    sys.exit(main())
