#!/usr/bin/env python3
"""
OEMSwap Configuration Management

Run configuration as nested dataclasses: physical parameters of a site,
output filters, the sweep grid and output settings. Loaded from JSON
(or YAML) with unknown fields rejected.
"""

import copy
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import yaml

from oemswap.core.oem_model import CAVITIES, CavityParams, SystemParams
from oemswap.core.output_spectra import FilterSpec
from oemswap.data import presets
from oemswap.utils.error_handler import ConfigError


SWEEP_VARIABLES = ("tau", "power_w", "temperature")
SWEEP_SCALES = ("linear", "log")
OUTPUT_FORMATS = ("csv", "json")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class CavityConfig:
    """One driven cavity. Frequencies are in Hz."""
    wavelength: float = 810.0e-9
    power: float = 1.0e-3
    kappa_hz: float = 2.5e6
    detuning_hz: float = 10.0e6
    g_hz: float = 152.0


def _default_cavities() -> Dict[str, CavityConfig]:
    return {name: CavityConfig(**values) for name, values in presets.CAVITIES.items()}


@dataclass
class SystemConfig:
    """Mechanical resonator, bath temperature and the three cavities."""
    frequency_hz: float = presets.MECHANICS["frequency_hz"]
    quality_factor: float = presets.MECHANICS["quality_factor"]
    mass: float = presets.MECHANICS["mass"]
    temperature: float = presets.MECHANICS["temperature"]
    cavities: Dict[str, CavityConfig] = field(default_factory=_default_cavities)


@dataclass
class ChannelFilterConfig:
    """Filter of one output channel: tau in units of 1/omega_m, omega in units of omega_m."""
    tau: float = 500.0
    omega: float = 1.0


def _default_filters() -> Dict[str, ChannelFilterConfig]:
    return {name: ChannelFilterConfig(**values) for name, values in presets.FILTERS.items()}


@dataclass
class FilterConfig:
    """Filters of the b, c and w output channels."""
    b: ChannelFilterConfig = field(default_factory=lambda: _default_filters()["b"])
    c: ChannelFilterConfig = field(default_factory=lambda: _default_filters()["c"])
    w: ChannelFilterConfig = field(default_factory=lambda: _default_filters()["w"])

    def channel(self, name: str) -> ChannelFilterConfig:
        return getattr(self, name)


@dataclass
class SweepConfig:
    """One-dimensional parameter grid."""
    variable: str = presets.SWEEPS[presets.DEFAULT_SWEEP]["variable"]
    start: float = presets.SWEEPS[presets.DEFAULT_SWEEP]["start"]
    stop: float = presets.SWEEPS[presets.DEFAULT_SWEEP]["stop"]
    points: int = presets.SWEEPS[presets.DEFAULT_SWEEP]["points"]
    scale: str = presets.SWEEPS[presets.DEFAULT_SWEEP]["scale"]


@dataclass
class OutputConfig:
    """Result file settings."""
    path: str = "sweep.csv"
    format: str = "csv"


@dataclass
class RunConfig:
    """Main configuration container."""
    system: SystemConfig = field(default_factory=SystemConfig)
    filters: FilterConfig = field(default_factory=FilterConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    # Runtime settings
    log_level: str = "INFO"
    log_file: Optional[str] = None
    workers: int = 1

    @classmethod
    def load_from_file(cls, config_path: str) -> "RunConfig":
        """Load configuration from a JSON or YAML file."""
        config_file = Path(config_path)
        if not config_file.exists():
            raise FileNotFoundError(f"Configuration file not found: {config_path}")

        text = config_file.read_text(encoding="utf-8")
        if config_file.suffix.lower() in (".yaml", ".yml"):
            try:
                config_data = yaml.safe_load(text)
            except yaml.YAMLError as e:
                mark = getattr(e, "problem_mark", None)
                raise ConfigError(
                    f"Invalid YAML: {getattr(e, 'problem', None) or e}",
                    line=mark.line + 1 if mark else None,
                    column=mark.column + 1 if mark else None,
                ) from None
        else:
            try:
                config_data = json.loads(text)
            except json.JSONDecodeError as e:
                raise ConfigError(f"Invalid JSON: {e.msg}", line=e.lineno, column=e.colno) from None

        return cls.from_dict(config_data if config_data is not None else {})

    @classmethod
    def from_dict(cls, config_data: Any) -> "RunConfig":
        """Build a RunConfig; absent fields keep their defaults."""
        if not isinstance(config_data, dict):
            raise ConfigError("Configuration must be a mapping at the top level")

        config = cls()
        _reject_unknown(config_data, [f.name for f in fields(cls)], "")

        if "system" in config_data:
            system_data = dict(_require_mapping(config_data["system"], "system"))
            cavities_data = system_data.pop("cavities", None)
            config.system = _build_section(SystemConfig, system_data, "system")
            if cavities_data is not None:
                cavities_data = _require_mapping(cavities_data, "system.cavities")
                _reject_unknown(cavities_data, CAVITIES, "system.cavities")
                for name, values in cavities_data.items():
                    base = asdict(config.system.cavities[name])
                    base.update(_require_mapping(values, f"system.cavities.{name}"))
                    config.system.cavities[name] = _build_section(
                        CavityConfig, base, f"system.cavities.{name}"
                    )
        if "filters" in config_data:
            filters_data = _require_mapping(config_data["filters"], "filters")
            _reject_unknown(filters_data, CAVITIES, "filters")
            for name, values in filters_data.items():
                base = asdict(config.filters.channel(name))
                base.update(_require_mapping(values, f"filters.{name}"))
                setattr(config.filters, name, _build_section(ChannelFilterConfig, base, f"filters.{name}"))
        if "sweep" in config_data:
            config.sweep = _build_section(SweepConfig, config_data["sweep"], "sweep")
        if "output" in config_data:
            config.output = _build_section(OutputConfig, config_data["output"], "output")

        for name, expected in (("log_level", str), ("log_file", (str, type(None))), ("workers", int)):
            if name in config_data:
                value = config_data[name]
                if not isinstance(value, expected) or isinstance(value, bool):
                    raise ConfigError(f"Wrong type {type(value).__name__}", field_path=name)
                setattr(config, name, value)

        return config

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def save_to_file(self, config_path: str):
        """Save configuration as JSON, or YAML for .yaml/.yml paths."""
        config_file = Path(config_path)
        config_file.parent.mkdir(parents=True, exist_ok=True)

        config_data = self.to_dict()
        with open(config_file, "w", encoding="utf-8", newline="\n") as f:
            if config_file.suffix.lower() in (".yaml", ".yml"):
                yaml.safe_dump(config_data, f, default_flow_style=False, indent=2, sort_keys=False)
            else:
                json.dump(config_data, f, indent=2)
                f.write("\n")

    def validate(self) -> List[str]:
        """Validate configuration and return list of issues."""
        issues = []

        system = self.system
        if not system.frequency_hz > 0:
            issues.append("system.frequency_hz must be positive")
        if not system.quality_factor > 1:
            issues.append("system.quality_factor must exceed 1")
        if not system.mass > 0:
            issues.append("system.mass must be positive")
        if not system.temperature >= 0:
            issues.append("system.temperature must be non-negative")

        for name in CAVITIES:
            cavity = system.cavities[name]
            prefix = f"system.cavities.{name}"
            if not cavity.wavelength > 0:
                issues.append(f"{prefix}.wavelength must be positive")
            if not cavity.power >= 0:
                issues.append(f"{prefix}.power must be non-negative")
            if not cavity.kappa_hz > 0:
                issues.append(f"{prefix}.kappa_hz must be positive")
            if not cavity.g_hz > 0:
                issues.append(f"{prefix}.g_hz must be positive")
            if not math.isfinite(cavity.detuning_hz):
                issues.append(f"{prefix}.detuning_hz must be finite")

        for name in CAVITIES:
            channel = self.filters.channel(name)
            if not (math.isfinite(channel.tau) and channel.tau > 0):
                issues.append(f"filters.{name}.tau must be positive")
            if not math.isfinite(channel.omega):
                issues.append(f"filters.{name}.omega must be finite")

        sweep = self.sweep
        if sweep.variable not in SWEEP_VARIABLES:
            issues.append(f"sweep.variable must be one of {SWEEP_VARIABLES}")
        if sweep.scale not in SWEEP_SCALES:
            issues.append(f"sweep.scale must be one of {SWEEP_SCALES}")
        if sweep.points < 1:
            issues.append("sweep.points must be at least 1")
        if sweep.points > 1 and not sweep.start < sweep.stop:
            issues.append("sweep.start must be below sweep.stop")
        if sweep.scale == "log" and not sweep.start > 0:
            issues.append("sweep.start must be positive for a log grid")
        if sweep.variable == "tau" and not sweep.start > 0:
            issues.append("sweep.start must be positive when sweeping tau")
        if sweep.variable in ("power_w", "temperature") and sweep.start < 0:
            issues.append(f"sweep.start must be non-negative when sweeping {sweep.variable}")

        if self.output.format not in OUTPUT_FORMATS:
            issues.append(f"output.format must be one of {OUTPUT_FORMATS}")
        if not self.output.path:
            issues.append("output.path must not be empty")
        if self.workers < 1:
            issues.append("workers must be at least 1")
        if self.log_level.upper() not in LOG_LEVELS:
            issues.append(f"log_level must be one of {LOG_LEVELS}")

        return issues

    def system_params(self) -> SystemParams:
        """Physical parameters in SI units with angular frequencies."""
        two_pi = 2.0 * math.pi
        cavities = {
            name: CavityParams(
                wavelength=c.wavelength,
                power=c.power,
                kappa=two_pi * c.kappa_hz,
                detuning=two_pi * c.detuning_hz,
                g=two_pi * c.g_hz,
            )
            for name, c in self.system.cavities.items()
        }
        return SystemParams(
            omega_m=two_pi * self.system.frequency_hz,
            q_m=self.system.quality_factor,
            mass=self.system.mass,
            temperature=self.system.temperature,
            cavities=cavities,
        )

    def filter_specs(self) -> Dict[str, FilterSpec]:
        omega_m = 2.0 * math.pi * self.system.frequency_hz
        return {
            name: FilterSpec(tau=self.filters.channel(name).tau / omega_m,
                             omega=self.filters.channel(name).omega * omega_m)
            for name in CAVITIES
        }

    def with_value(self, variable: str, value: float) -> "RunConfig":
        """Copy of this configuration with the swept variable set to `value`."""
        point = copy.deepcopy(self)
        if variable == "tau":
            for name in CAVITIES:
                point.filters.channel(name).tau = float(value)
        elif variable == "power_w":
            point.system.cavities["w"].power = float(value)
        elif variable == "temperature":
            point.system.temperature = float(value)
        else:
            raise ConfigError(f"Unknown sweep variable {variable!r}", field_path="sweep.variable")
        return point

    @classmethod
    def from_preset(cls, name: str) -> "RunConfig":
        if name not in presets.SWEEPS:
            raise ConfigError(f"Unknown preset {name!r}; choose from {presets.available_presets()}")
        config = cls()
        config.sweep = SweepConfig(**presets.SWEEPS[name])
        return config


def _require_mapping(value: Any, path: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise ConfigError(f"Expected a mapping, got {type(value).__name__}", field_path=path)
    return value


def _reject_unknown(data: Dict[str, Any], allowed, path: str):
    for key in data:
        if key not in allowed:
            raise ConfigError("Unknown field", field_path=f"{path}.{key}" if path else str(key))


def _type_ok(value: Any, default: Any) -> bool:
    if isinstance(value, bool):
        return isinstance(default, bool)
    if isinstance(default, float):
        return isinstance(value, (int, float))
    if isinstance(default, int):
        return isinstance(value, int)
    if isinstance(default, str):
        return isinstance(value, str)
    return True


def _build_section(section_cls, data: Any, path: str):
    """Construct a section dataclass, failing closed on unknown or mistyped fields."""
    data = _require_mapping(data, path)
    defaults = section_cls()
    allowed: Tuple[str, ...] = tuple(f.name for f in fields(section_cls))
    _reject_unknown(data, allowed, path)
    for key, value in data.items():
        if not _type_ok(value, getattr(defaults, key)):
            raise ConfigError(f"Wrong type {type(value).__name__}", field_path=f"{path}.{key}")
    merged = {name: getattr(defaults, name) for name in allowed}
    merged.update(data)
    try:
        section = section_cls(**merged)
    except TypeError as e:
        raise ConfigError(str(e), field_path=path) from None
    for f in fields(section_cls):
        if isinstance(getattr(defaults, f.name), float):
            setattr(section, f.name, float(getattr(section, f.name)))
    return section


def setup_logging(config: RunConfig) -> logging.Logger:
    """Setup logging configuration for OEMSwap."""
    logger = logging.getLogger("oemswap")
    level = getattr(logging, config.log_level.upper(), logging.INFO)
    logger.setLevel(level)

    # Clear existing handlers
    logger.handlers.clear()

    formatter = logging.Formatter(
        "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    )

    # Console handler on stderr; stdout is reserved for the run summary
    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if config.log_file:
        try:
            file_handler = logging.FileHandler(Path(config.log_file))
            file_handler.setLevel(level)
            file_handler.setFormatter(formatter)
            logger.addHandler(file_handler)
        except Exception as e:
            logger.warning(f"Could not create log file: {e}")

    return logger


def check_dependencies() -> Dict[str, bool]:
    """Check for required dependencies."""
    deps = {}
    for module in ("numpy", "scipy", "yaml", "tqdm", "colorama"):
        try:
            __import__(module)
            deps[module] = True
        except ImportError:
            deps[module] = False
    return deps
