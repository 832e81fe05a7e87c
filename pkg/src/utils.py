"""
Utility functions for the simplifying-assumption test toolkit
This module provides common utility functions used across the project.
"""

import os
import logging
from typing import Any, Dict, List, Optional, Tuple

from .exceptions import ValidationError

logger = logging.getLogger("SVCT.Utils")

TRUE_WORDS = ('true', 't', 'yes', 'y', '1', 'on')
FALSE_WORDS = ('false', 'f', 'no', 'n', '0', 'off')

def configure_logging(
    level: int = logging.INFO,
    log_file: Optional[str] = None,
    console: bool = True,
    file_level: Optional[int] = None
) -> None:
    """Configure logging for command-line use

    Args:
        level: Logging level for the root logger
        log_file: Path to log file (if None, file logging is disabled)
        console: Whether to enable console logging
        file_level: Logging level for the file handler (defaults to the same as level)
    """
    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    logging.getLogger("SVCT").setLevel(level)

    root_logger.handlers = []

    console_formatter = logging.Formatter('%(levelname)s: %(message)s')
    file_formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

    if console:
        console_handler = logging.StreamHandler()
        console_handler.setLevel(level)
        console_handler.setFormatter(console_formatter)
        root_logger.addHandler(console_handler)

    if log_file:
        os.makedirs(os.path.dirname(os.path.abspath(log_file)), exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(file_level or level)
        file_handler.setFormatter(file_formatter)
        root_logger.addHandler(file_handler)

    # Library loggers stay quiet
    logging.getLogger("joblib").setLevel(logging.WARNING)

def load_key_value_file(config_path: str) -> Dict[str, str]:
    """Load a flat ``key=value`` file; ``#`` starts a comment

    Args:
        config_path: Path to the file

    Returns:
        Dict[str, str]: Raw string values keyed by name
    """
    values: Dict[str, str] = {}
    with open(config_path, 'r', encoding='utf-8') as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            if '=' not in line:
                raise ValidationError(f"{config_path}:{lineno}: expected key=value, got '{line}'")
            key, value = line.split('=', 1)
            values[key.strip()] = value.strip()
    return values

def config_to_argv(values: Dict[str, Any], flag_names: Optional[List[str]] = None) -> List[str]:
    """Turn flat configuration values into command-line tokens

    Keys are long flag names with or without leading dashes; underscores and
    dashes are interchangeable. Boolean flags (listed in ``flag_names``) emit
    the bare flag when true and nothing when false.

    Args:
        values: Flat mapping of flag name to value
        flag_names: Names of store_true flags

    Returns:
        List[str]: Tokens such as ``['--reps', '200']``
    """
    flags = {name.lstrip('-').replace('_', '-') for name in (flag_names or [])}
    argv: List[str] = []
    for key, value in values.items():
        name = str(key).lstrip('-').replace('_', '-')
        if isinstance(value, dict):
            raise ValidationError(f"Nested value for '{key}' is not allowed in a flat config file")
        if name in flags:
            text = str(value).strip().lower()
            if isinstance(value, bool) and value or text in TRUE_WORDS:
                argv.append(f"--{name}")
            elif not (isinstance(value, bool) or text in FALSE_WORDS):
                raise ValidationError(f"Flag '{key}' expects true/false, got '{value}'")
            continue
        if isinstance(value, (list, tuple)):
            value = ",".join(str(v) for v in value)
        argv.extend([f"--{name}", str(value)])
    return argv

def parse_float_list(text: str, name: str = "value") -> List[float]:
    """Parse ``"0,0.5,1"`` into floats"""
    try:
        return [float(part) for part in str(text).split(',') if part.strip()]
    except ValueError:
        raise ValidationError(f"Invalid number list: {text}", field_name=name)

def parse_int_list(text: str, name: str = "value") -> List[int]:
    """Parse ``"500,1000"`` into integers"""
    try:
        return [int(part) for part in str(text).split(',') if part.strip()]
    except ValueError:
        raise ValidationError(f"Invalid integer list: {text}", field_name=name)

def parse_str_list(text: str) -> List[str]:
    """Parse a comma-separated list of names"""
    return [part.strip().lower() for part in str(text).split(',') if part.strip()]

def parse_edge(text: str) -> Tuple[int, int]:
    """Parse an edge given as ``"i,j"`` (1-based leftmost variable, tree index)"""
    parts = parse_int_list(text, "edge")
    if len(parts) != 2:
        raise ValidationError(f"Edge must be given as i,j: {text}", field_name="edge")
    return parts[0], parts[1]

def parse_penalty_grid(text: str) -> List[Tuple[float, float]]:
    """Parse ``"1:0.5,0.5:0.5"`` into (c, beta) pairs"""
    grid = []
    for item in str(text).split(','):
        item = item.strip()
        if not item:
            continue
        try:
            c, beta = item.split(':')
            grid.append((float(c), float(beta)))
        except ValueError:
            raise ValidationError(f"Penalty grid entries must look like c:beta, got '{item}'",
                                  field_name="penalty-grid")
    return grid

def format_bytes(bytes: int) -> str:
    """Format bytes into a human-readable string

    Args:
        bytes: Number of bytes

    Returns:
        str: Formatted string (e.g., "1.23 MB")
    """
    suffixes = ['B', 'KB', 'MB', 'GB', 'TB', 'PB']
    i = 0
    size = float(bytes)
    while size >= 1024 and i < len(suffixes) - 1:
        size /= 1024
        i += 1

    return f"{size:.2f} {suffixes[i]}"

