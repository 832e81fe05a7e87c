"""
Configuration Management Module
Handles loading, validating, and accessing configuration settings
"""

import os
import copy
import yaml
import logging
import argparse
from typing import Dict, Any, Optional

from .constants import (
    DEFAULT_ALPHA, DEFAULT_J_MAX, DEFAULT_MIN_LEAF, DEFAULT_PENALTY_C, DEFAULT_PENALTY_BETA,
    DEFAULT_BOOTSTRAP_REPS, DEFAULT_REPS, DEFAULT_FULL_SCALE_REPS, DEFAULT_RANDOM_SEED,
    DEFAULT_CACHE_TTL, COV_SANDWICH, VALID_COV_MODES
)
from .exceptions import ConfigurationError

logger = logging.getLogger("SVCT.Config")

# Default configuration values
DEFAULT_CONFIG = {
    "test": {
        "alpha": DEFAULT_ALPHA,
        "j_max": DEFAULT_J_MAX,
        "min_leaf": DEFAULT_MIN_LEAF,
        "penalty_c": DEFAULT_PENALTY_C,
        "penalty_beta": DEFAULT_PENALTY_BETA,
        "cov_mode": COV_SANDWICH,
        "bootstrap_reps": DEFAULT_BOOTSTRAP_REPS
    },
    "study": {
        "reps": DEFAULT_REPS,
        "full_scale_reps": DEFAULT_FULL_SCALE_REPS,
        "seed": DEFAULT_RANDOM_SEED,
        "threads": 1,
        "max_threads": 0  # 0: no cap
    },
    "cache": {
        "enabled": False,
        "ttl": DEFAULT_CACHE_TTL,
        "dir": "~/.svct/cache",
        "compression": True
    },
    "logging": {
        "level": "INFO",
        "file": None,
        "max_size": 10485760,  # 10 MB
        "backup_count": 5,
        "console": True
    }
}

# Environment variables that do not follow the SECTION_KEY scheme
ENV_ALIASES = {
    "THREADS": ("study", "max_threads"),
}

class Config:
    """Configuration management class"""

    def __init__(self):
        self._config = copy.deepcopy(DEFAULT_CONFIG)
        self._config_file = None
        self._env_prefix = "SVCT_"

    def load(self, config_file: Optional[str] = None) -> bool:
        """Load configuration from a YAML file

        Args:
            config_file: Path to configuration file (default: None, which uses default locations)

        Returns:
            bool: True if configuration was loaded successfully
        """
        if config_file:
            config_paths = [config_file]
        else:
            config_paths = [
                "./svct.yaml",
                "./svct.yml",
                "~/.svct/config.yaml"
            ]

        for path in config_paths:
            expanded_path = os.path.expanduser(path)
            if os.path.exists(expanded_path):
                try:
                    with open(expanded_path, 'r') as f:
                        file_config = yaml.safe_load(f)
                except (OSError, yaml.YAMLError) as e:
                    logger.warning(f"Error loading config from {expanded_path}: {e}")
                    continue
                if file_config:
                    if not isinstance(file_config, dict):
                        raise ConfigurationError(f"{expanded_path} must contain a mapping")
                    self._update_config(file_config)
                    self._config_file = expanded_path
                    logger.info(f"Loaded configuration from {expanded_path}")
                    return True

        logger.debug("No configuration file found, using defaults")
        return False

    def _update_config(self, new_config: Dict[str, Any], base: Optional[Dict[str, Any]] = None,
                      path: str = "") -> None:
        """Recursively update configuration

        Args:
            new_config: New configuration values
            base: Base configuration to update (default: None, which uses root config)
            path: Current path in the configuration (for logging)
        """
        if base is None:
            base = self._config

        for key, value in new_config.items():
            current_path = f"{path}.{key}" if path else key

            if isinstance(value, dict) and key in base and isinstance(base[key], dict):
                self._update_config(value, base[key], current_path)
            else:
                base[key] = value
                logger.debug(f"Updated config {current_path} = {value}")

    @staticmethod
    def _coerce(orig_value: Any, raw: str, var_name: str) -> Any:
        if isinstance(orig_value, bool):
            return raw.lower() in ('true', 't', 'yes', 'y', '1')
        if isinstance(orig_value, int):
            try:
                return int(raw)
            except ValueError:
                raise ConfigurationError(f"Invalid integer value for {var_name}: {raw}")
        if isinstance(orig_value, float):
            try:
                return float(raw)
            except ValueError:
                raise ConfigurationError(f"Invalid float value for {var_name}: {raw}")
        return raw

    def load_from_env(self) -> None:
        """Load configuration from environment variables

        Environment variables should be in the format:
        SVCT_SECTION_KEY=value

        For example:
        SVCT_TEST_MIN_LEAF=50
        SVCT_THREADS=4   (alias for SVCT_STUDY_MAX_THREADS)
        """
        for var_name, var_value in os.environ.items():
            if not var_name.startswith(self._env_prefix):
                continue
            suffix = var_name[len(self._env_prefix):]

            if suffix in ENV_ALIASES:
                section, key = ENV_ALIASES[suffix]
            else:
                config_path = suffix.lower().split('_')
                if len(config_path) < 2:
                    continue
                section = config_path[0]
                key = '_'.join(config_path[1:])

            if section in self._config and key in self._config[section]:
                orig_value = self._config[section][key]
                self._config[section][key] = self._coerce(orig_value, var_value, var_name)
                logger.debug(f"Set {section}.{key} from environment variable {var_name}")

    def load_from_args(self, args: argparse.Namespace) -> None:
        """Load configuration from command line arguments

        Args:
            args: Parsed command line arguments
        """
        arg_mapping = {
            "alpha": ("test", "alpha"),
            "j_max": ("test", "j_max"),
            "min_leaf": ("test", "min_leaf"),
            "penalty_c": ("test", "penalty_c"),
            "penalty_beta": ("test", "penalty_beta"),
            "cov_mode": ("test", "cov_mode"),
            "bootstrap_reps": ("test", "bootstrap_reps"),
            "reps": ("study", "reps"),
            "seed": ("study", "seed"),
            "workers": ("study", "threads"),
            "cache": ("cache", "enabled"),
            "cache_dir": ("cache", "dir"),
            "log_level": ("logging", "level"),
            "log_file": ("logging", "file")
        }

        for arg_name, config_path in arg_mapping.items():
            if hasattr(args, arg_name) and getattr(args, arg_name) is not None:
                section, key = config_path
                value = getattr(args, arg_name)
                self._config[section][key] = value
                logger.debug(f"Set {section}.{key} from command line argument --{arg_name}")

        self.validate()

    def validate(self) -> None:
        """Check ranges of the test and study settings

        Raises:
            ConfigurationError: If a setting is out of range
        """
        test = self.get_test_config()
        if not 0.0 < float(test["alpha"]) < 1.0:
            raise ConfigurationError("alpha must lie in (0, 1)", "alpha", "test")
        if int(test["j_max"]) < 1:
            raise ConfigurationError("j_max must be at least 1", "j_max", "test")
        if int(test["min_leaf"]) < 2:
            raise ConfigurationError("min_leaf must be at least 2", "min_leaf", "test")
        if float(test["penalty_c"]) <= 0.0 or float(test["penalty_beta"]) <= 0.0:
            raise ConfigurationError("penalty c and beta must be positive", "penalty_c", "test")
        if test["cov_mode"] not in VALID_COV_MODES:
            raise ConfigurationError(f"cov_mode must be one of {VALID_COV_MODES}", "cov_mode", "test")
        if int(self.get("study", "reps")) < 1:
            raise ConfigurationError("reps must be at least 1", "reps", "study")
        if int(self.get("study", "full_scale_reps")) < 1:
            raise ConfigurationError("full_scale_reps must be at least 1", "full_scale_reps", "study")

    def save(self, filename: Optional[str] = None) -> bool:
        """Save current configuration to file

        Args:
            filename: Path to save configuration to (default: None, which uses the loaded file)

        Returns:
            bool: True if configuration was saved successfully
        """
        save_path = filename or self._config_file

        if not save_path:
            save_path = os.path.expanduser("~/.svct/config.yaml")
            os.makedirs(os.path.dirname(save_path), exist_ok=True)

        try:
            with open(save_path, 'w') as f:
                yaml.safe_dump(self._config, f, default_flow_style=False)
            logger.info(f"Saved configuration to {save_path}")
            return True
        except OSError as e:
            logger.error(f"Error saving configuration to {save_path}: {e}")
            return False

    def get(self, section: str, key: str, default: Any = None) -> Any:
        """Get configuration value"""
        if section in self._config and key in self._config[section]:
            return self._config[section][key]
        return default

    def set(self, section: str, key: str, value: Any) -> None:
        """Set configuration value"""
        if section not in self._config:
            self._config[section] = {}
        self._config[section][key] = value

    def get_test_config(self) -> Dict[str, Any]:
        """Get CCC test configuration

        Returns:
            Dict[str, Any]: Test configuration
        """
        return self._config.get("test", {})

    def get_study_config(self) -> Dict[str, Any]:
        """Get Monte Carlo study configuration

        Returns:
            Dict[str, Any]: Study configuration
        """
        return self._config.get("study", {})

    def get_cache_config(self) -> Dict[str, Any]:
        """Get cache configuration

        Returns:
            Dict[str, Any]: Cache configuration
        """
        return self._config.get("cache", {})

    def get_logging_config(self) -> Dict[str, Any]:
        """Get logging configuration

        Returns:
            Dict[str, Any]: Logging configuration
        """
        return self._config.get("logging", {})

    def setup_logging(self) -> None:
        """Configure logging based on current settings"""
        log_config = self.get_logging_config()

        log_level = getattr(logging, str(log_config.get("level", "INFO")).upper(), logging.INFO)
        root_logger = logging.getLogger()
        root_logger.setLevel(log_level)
        logging.getLogger("SVCT").setLevel(log_level)

        for handler in root_logger.handlers[:]:
            root_logger.removeHandler(handler)

        formatter = logging.Formatter('%(asctime)s [%(levelname)s] %(name)s: %(message)s')

        if log_config.get("console", True):
            console_handler = logging.StreamHandler()
            console_handler.setLevel(log_level)
            console_handler.setFormatter(formatter)
            root_logger.addHandler(console_handler)

        log_file = log_config.get("file")
        if log_file:
            try:
                log_file = os.path.expanduser(log_file)

                log_dir = os.path.dirname(log_file)
                if log_dir:
                    os.makedirs(log_dir, exist_ok=True)

                from logging.handlers import RotatingFileHandler
                file_handler = RotatingFileHandler(
                    log_file,
                    maxBytes=log_config.get("max_size", 10485760),
                    backupCount=log_config.get("backup_count", 5)
                )
                file_handler.setLevel(log_level)
                file_handler.setFormatter(formatter)
                root_logger.addHandler(file_handler)

                logger.debug(f"Configured logging to file: {log_file}")
            except OSError as e:
                logger.error(f"Failed to configure file logging: {e}")

# Singleton instance
_config_instance = None

def get_config() -> Config:
    """Get the configuration instance

    Returns:
        Config: Configuration instance
    """
    global _config_instance
    if _config_instance is None:
        _config_instance = Config()
    return _config_instance

def reset_config() -> None:
    """Drop the configuration singleton (used by tests)"""
    global _config_instance
    _config_instance = None
