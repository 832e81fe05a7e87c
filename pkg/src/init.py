"""
Initialization Module
Loads configuration and prepares the directories the toolkit writes to.
"""

import os
import logging
from typing import Optional

from .config import get_config

logger = logging.getLogger("SVCT.Init")

def initialize(config_file: Optional[str] = None, create_default_config: bool = False) -> bool:
    """Initialize configuration, logging and directories

    Args:
        config_file: Path to a YAML configuration file (default: None, which uses default locations)
        create_default_config: Whether to write a default configuration file if none exists

    Returns:
        bool: True if a configuration file was loaded or created
    """
    config = get_config()
    config_loaded = config.load(config_file)

    config.load_from_env()

    if not config_loaded and create_default_config:
        logger.info("Creating default configuration")
        config_loaded = config.save()

    config.setup_logging()
    ensure_directories()
    return config_loaded

def ensure_directories() -> None:
    """Create the cache directory (when caching is on) and the log directory"""
    config = get_config()

    cache_config = config.get_cache_config()
    if cache_config.get("enabled", False):
        os.makedirs(os.path.expanduser(cache_config.get("dir", "~/.svct/cache")), exist_ok=True)

    log_file = config.get_logging_config().get("file")
    if log_file:
        log_dir = os.path.dirname(os.path.expanduser(log_file))
        if log_dir:
            os.makedirs(log_dir, exist_ok=True)
