"""
HRC Configuration Management

Runtime settings for simulations, regressions, grid sweeps, logging and
artifact output. Problem instances themselves live in JSON problem files
(see ``hrc.core.problem``); this module only holds how to solve them.
"""

import os
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import json
import yaml
from dotenv import load_dotenv


logger = logging.getLogger(__name__)


class LogLevel(str, Enum):
    """Logging levels."""
    DEBUG = "DEBUG"
    INFO = "INFO"
    WARNING = "WARNING"
    ERROR = "ERROR"
    CRITICAL = "CRITICAL"


class LogFormat(str, Enum):
    """Log renderers."""
    JSON = "json"
    CONSOLE = "console"


@dataclass
class SimulationConfig:
    """Monte-Carlo simulation settings."""
    n_paths: int = 10000
    dt: float = 1.0 / 64
    seed: int = 42
    threads: int = field(default_factory=lambda: os.cpu_count() or 1)


@dataclass
class RegressionConfig:
    """Least-squares conditional expectation settings."""
    degree: int = 2
    condition_limit: float = 1e12


@dataclass
class GridConfig:
    """Finite-difference lattice settings."""
    nodes_per_axis: int = 101
    n_t: Optional[int] = None
    dt: Optional[float] = None
    cfl_safety: float = 0.9


@dataclass
class MonitoringConfig:
    """Logging configuration."""
    log_level: LogLevel = LogLevel.INFO
    log_format: LogFormat = LogFormat.JSON
    log_file_path: str = ""


@dataclass
class OutputConfig:
    """Artifact output configuration."""
    out_dir: str = "./hrc-out"
    float_digits: int = 17
    dump_paths: bool = False
    dump_bsde: bool = False


SECTIONS = {
    "simulation": SimulationConfig,
    "regression": RegressionConfig,
    "grid": GridConfig,
    "monitoring": MonitoringConfig,
    "output": OutputConfig,
}


@dataclass
class HRCConfig:
    """Main HRC runtime configuration."""
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    regression: RegressionConfig = field(default_factory=RegressionConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    monitoring: MonitoringConfig = field(default_factory=MonitoringConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @classmethod
    def from_file(cls, config_path: Union[str, Path], base: Optional['HRCConfig'] = None) -> 'HRCConfig':
        """Load configuration from a YAML or JSON file, section by section over ``base``."""
        config_path = Path(config_path)
        base = base or cls()

        if not config_path.exists():
            logger.warning(f"Config file not found: {config_path}. Using defaults.")
            return base

        with open(config_path, 'r') as f:
            if config_path.suffix.lower() in ['.yml', '.yaml']:
                data = yaml.safe_load(f) or {}
            elif config_path.suffix.lower() == '.json':
                data = json.load(f)
            else:
                raise ValueError(f"Unsupported config file format: {config_path.suffix}")

        merged = base.to_dict()
        for section, values in data.items():
            if section not in SECTIONS:
                raise ValueError(f"Unknown configuration section: {section}")
            merged[section].update(values or {})
        return cls.from_dict(merged)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'HRCConfig':
        """Create configuration from dictionary; unknown keys are errors."""
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ValueError(f"Unknown configuration sections: {', '.join(unknown)}")

        config = cls()
        for name, section_cls in SECTIONS.items():
            if name in data:
                section = dict(data[name] or {})
                if name == "monitoring":
                    if "log_level" in section:
                        section["log_level"] = LogLevel(str(section["log_level"]).upper())
                    if "log_format" in section:
                        section["log_format"] = LogFormat(section["log_format"])
                setattr(config, name, section_cls(**section))
        return config

    @classmethod
    def from_env(cls, base: Optional['HRCConfig'] = None) -> 'HRCConfig':
        """Apply HRC_* environment variables (and a local .env file) on top of ``base``."""
        load_dotenv()
        config = base or cls()

        config.simulation.seed = int(os.getenv('HRC_SEED', str(config.simulation.seed)))
        config.simulation.threads = int(os.getenv('HRC_THREADS', str(config.simulation.threads)))
        config.simulation.n_paths = int(os.getenv('HRC_PATHS', str(config.simulation.n_paths)))
        config.monitoring.log_level = LogLevel(
            os.getenv('HRC_LOG_LEVEL', config.monitoring.log_level.value).upper()
        )
        config.output.out_dir = os.getenv('HRC_OUT_DIR', config.output.out_dir)

        return config

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary."""
        data = {name: asdict(getattr(self, name)) for name in SECTIONS}
        data["monitoring"]["log_level"] = self.monitoring.log_level.value
        data["monitoring"]["log_format"] = self.monitoring.log_format.value
        return data

    def save_to_file(self, config_path: Union[str, Path]):
        """Save configuration to file."""
        config_path = Path(config_path)
        config_path.parent.mkdir(parents=True, exist_ok=True)

        data = self.to_dict()

        with open(config_path, 'w') as f:
            if config_path.suffix.lower() in ['.yml', '.yaml']:
                yaml.safe_dump(data, f, default_flow_style=False, indent=2)
            elif config_path.suffix.lower() == '.json':
                json.dump(data, f, indent=2)
            else:
                raise ValueError(f"Unsupported config file format: {config_path.suffix}")

        logger.info(f"Configuration saved to {config_path}")

    def validate(self) -> List[str]:
        """Validate configuration and return list of issues."""
        issues = []

        if self.simulation.n_paths < 1:
            issues.append("simulation.n_paths must be >= 1")
        if self.simulation.dt <= 0:
            issues.append("simulation.dt must be positive")
        if self.simulation.threads < 1:
            issues.append("simulation.threads must be >= 1")

        if self.regression.degree < 0:
            issues.append("regression.degree must be >= 0")
        if self.regression.condition_limit <= 1:
            issues.append("regression.condition_limit must exceed 1")

        if self.grid.nodes_per_axis < 3:
            issues.append("grid.nodes_per_axis must be >= 3")
        if self.grid.n_t is not None and self.grid.n_t < 1:
            issues.append("grid.n_t must be >= 1")
        if self.grid.dt is not None and self.grid.dt <= 0:
            issues.append("grid.dt must be positive")
        if not 0 < self.grid.cfl_safety <= 1:
            issues.append("grid.cfl_safety must be in (0, 1]")

        if not 1 <= self.output.float_digits <= 17:
            issues.append("output.float_digits must be between 1 and 17")

        return issues


def load_config(config_path: Optional[Union[str, Path]] = None) -> HRCConfig:
    """
    Load HRC configuration from various sources.

    Priority order (later wins):
    1. Default configuration
    2. Environment variables
    3. Specified config file, or the first default location found
    """
    config = HRCConfig.from_env()

    if config_path:
        path = Path(config_path)
        if not path.exists():
            raise ValueError(f"Config file not found: {path}")
    else:
        default_paths = [
            Path("hrc.yml"),
            Path("hrc.yaml"),
            Path("hrc.json"),
            Path("~/.hrc/config.yml").expanduser(),
        ]
        path = next((p for p in default_paths if p.exists()), None)
        if path is None:
            logger.info("Loading configuration from environment variables")
            return config

    logger.info(f"Loading configuration from {path}")
    return HRCConfig.from_file(path, base=config)
