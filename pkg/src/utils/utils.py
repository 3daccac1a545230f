"""
Utilities for calkin-lift: logging setup, report formatting, error mapping, config validation
"""

import json
import math
import logging
from typing import Any, List, Optional

from utils.errors import CalkinLiftError, ConfigError, SpecSyntaxError


logger = logging.getLogger(__name__)


class ReportFormatter:
    """Utility class for deterministic JSON output"""

    @staticmethod
    def normalize(value: Any) -> Any:
        """Recursively replace non-finite floats by strings and numpy scalars by Python ones"""
        if isinstance(value, dict):
            return {str(k): ReportFormatter.normalize(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [ReportFormatter.normalize(v) for v in value]
        if isinstance(value, bool) or value is None or isinstance(value, str):
            return value
        if isinstance(value, int):
            return int(value)
        if isinstance(value, complex):
            return [ReportFormatter.normalize(value.real), ReportFormatter.normalize(value.imag)]
        if hasattr(value, 'tolist'):
            return ReportFormatter.normalize(value.tolist())
        if isinstance(value, float):
            if math.isnan(value):
                return "nan"
            if math.isinf(value):
                return "inf" if value > 0 else "-inf"
            # 17 significant digits, emitted as the round-trip repr
            return float(format(value, '.17g'))
        return value

    @staticmethod
    def dumps(data: Any) -> str:
        """Serialize to JSON with stable layout and a trailing newline"""
        return json.dumps(
            ReportFormatter.normalize(data),
            indent=2,
            ensure_ascii=False,
            allow_nan=False,
        ) + "\n"


class ErrorHandler:
    """Utility class for handling errors"""

    @staticmethod
    def describe(error: Exception) -> str:
        """User-facing one-line message"""
        if isinstance(error, SpecSyntaxError):
            return f"Syntax error in spectrum document: {error}"
        if isinstance(error, CalkinLiftError):
            return f"{type(error).__name__}: {error}"
        if isinstance(error, OSError):
            return f"I/O error: {error}"
        return f"Unexpected error: {type(error).__name__}: {error}"

    @staticmethod
    def handle_run_error(error: Exception) -> int:
        """Log the failure; every error exits with status 1"""
        logger.error(ErrorHandler.describe(error))
        logger.debug("Traceback:", exc_info=error)
        return 1


class ConfigValidator:
    """Utility class for validating configuration"""

    @staticmethod
    def validate_run_config(config) -> List[str]:
        """Validate run configuration and return list of issues"""
        issues = []

        if not isinstance(config.depth, int) or config.depth < 1:
            issues.append("depth must be a positive integer")

        theta = config.raster.theta_cells
        if not isinstance(theta, int) or theta < 4 or theta & (theta - 1):
            issues.append("theta_cells must be a power of two (at least 4)")

        for name in ('u_cells_per_unit', 'planar_cells'):
            value = getattr(config.raster, name)
            if not isinstance(value, int) or value <= 0:
                issues.append(f"{name} must be a positive integer")

        for name in ('canonical', 'twisted', 'depth'):
            value = getattr(config.fibers, name)
            if not isinstance(value, int) or value <= 0:
                issues.append(f"fibers.{name} must be a positive integer")

        t = config.thresholds
        if not 0 < t.necessary_pass < t.necessary_fail:
            issues.append("thresholds must satisfy 0 < necessary_pass < necessary_fail")
        if not 0 < t.necessary_tail_fraction <= 1:
            issues.append("necessary_tail_fraction must lie in (0, 1]")
        if t.o2n_ratio <= 1:
            issues.append("o2n_ratio must exceed 1")
        if t.o2n_window < 2:
            issues.append("o2n_window must be at least 2")
        if t.quasi_max_indices < 1:
            issues.append("quasi_max_indices must be positive")
        if t.min_certified_levels < 1:
            issues.append("min_certified_levels must be positive")
        if config.threads < 1:
            issues.append("threads must be positive")

        return issues


class Logger:
    """Utility class for logging setup"""

    _handlers: List[logging.Handler] = []

    @staticmethod
    def setup_logging(level: str = "INFO", log_file: Optional[str] = None):
        """Setup logging configuration; repeated calls replace earlier handlers"""

        # Convert string level to logging constant
        numeric_level = getattr(logging, level.upper(), None)
        if not isinstance(numeric_level, int):
            raise ConfigError(f'Invalid log level: {level}')

        formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )

        root_logger = logging.getLogger()
        for handler in Logger._handlers:
            root_logger.removeHandler(handler)
        Logger._handlers = []

        # Console output on stderr; stdout carries the report
        console_handler = logging.StreamHandler()
        console_handler.setLevel(numeric_level)
        console_handler.setFormatter(formatter)
        root_logger.setLevel(numeric_level)
        root_logger.addHandler(console_handler)
        Logger._handlers.append(console_handler)

        if log_file:
            file_handler = logging.FileHandler(log_file)
            file_handler.setLevel(numeric_level)
            file_handler.setFormatter(formatter)
            root_logger.addHandler(file_handler)
            Logger._handlers.append(file_handler)

        # matplotlib is chatty at DEBUG
        logging.getLogger('matplotlib').setLevel(max(numeric_level, logging.WARNING))
