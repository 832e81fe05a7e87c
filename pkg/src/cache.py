"""
Cache Module
Stores finished Monte Carlo cell results so that repeated study runs can skip them.
"""

import os
import json
import time
import hashlib
import logging
import gzip
from typing import Dict, Any, Optional
from datetime import datetime

from .config import get_config
from .exceptions import CacheError
from .error_handler import ErrorContext
from .utils import format_bytes

logger = logging.getLogger("SVCT.Cache")

class ResultCache:
    """Caches study cell results keyed by a canonical description of the cell"""

    def __init__(self, cache_dir: Optional[str] = None, ttl: Optional[int] = None,
                compression: Optional[bool] = None):
        """Initialize the result cache

        Args:
            cache_dir: Directory to store cache files (default: from config)
            ttl: Cache time-to-live in seconds (default: from config)
            compression: Whether to compress cached data (default: from config)
        """
        cache_config = get_config().get_cache_config()

        self.cache_dir = os.path.expanduser(cache_dir or cache_config.get("dir", "~/.svct/cache"))
        self.ttl = ttl or cache_config.get("ttl", 604800)
        self.compression = compression if compression is not None else cache_config.get("compression", True)

        os.makedirs(self.cache_dir, exist_ok=True)
        logger.debug(f"Initialized result cache in {self.cache_dir} with TTL {self.ttl}s" +
                    f" (compression: {'enabled' if self.compression else 'disabled'})")

    @staticmethod
    def make_key(descriptor: Dict[str, Any]) -> str:
        """Generate a cache key for a cell descriptor

        Args:
            descriptor: JSON-serializable description (study, cell, seed, reps, settings)

        Returns:
            str: Cache key
        """
        canonical = json.dumps(descriptor, sort_keys=True, separators=(",", ":"), default=str)
        return hashlib.md5(canonical.encode()).hexdigest()

    def _paths(self, cache_key: str):
        return [
            os.path.join(self.cache_dir, f"{cache_key}.json.gz"),
            os.path.join(self.cache_dir, f"{cache_key}.json")
        ]

    def _get_cache_path(self, cache_key: str) -> str:
        ext = ".json.gz" if self.compression else ".json"
        return os.path.join(self.cache_dir, f"{cache_key}{ext}")

    def get(self, descriptor: Dict[str, Any]) -> Optional[Dict]:
        """Get a cached cell result

        Args:
            descriptor: Cell descriptor

        Returns:
            Optional[Dict]: Cached result or None if not found or expired
        """
        cache_key = self.make_key(descriptor)
        context_info = {"key": cache_key, "operation": "get", "cache_dir": self.cache_dir}

        with ErrorContext(context_info, CacheError, "CACHE_READ_ERROR"):
            for cache_path in self._paths(cache_key):
                if not os.path.exists(cache_path):
                    continue

                file_age = time.time() - os.path.getmtime(cache_path)
                if file_age > self.ttl:
                    logger.debug(f"Cache expired for {cache_key} (age: {file_age:.1f}s)")
                    return None

                try:
                    if cache_path.endswith('.gz'):
                        with gzip.open(cache_path, 'rt', encoding='utf-8') as f:
                            cached_data = json.load(f)
                    else:
                        with open(cache_path, 'r', encoding='utf-8') as f:
                            cached_data = json.load(f)
                except (json.JSONDecodeError, OSError, EOFError) as e:
                    logger.warning(f"Unreadable cache file {cache_path}: {e}")
                    try:
                        os.remove(cache_path)
                        logger.info(f"Removed corrupted cache file: {cache_path}")
                    except OSError as rm_e:
                        logger.warning(f"Could not remove corrupted cache file: {rm_e}")
                    return None

                logger.debug(f"Cache hit for {cache_key}")
                return cached_data

            logger.debug(f"Cache miss for {cache_key}")
            return None

    def set(self, descriptor: Dict[str, Any], data: Dict) -> bool:
        """Store a cell result in the cache

        Args:
            descriptor: Cell descriptor
            data: JSON-serializable result

        Returns:
            bool: True if successful, False otherwise
        """
        if not data:
            logger.warning("Attempted to cache empty data")
            return False

        cache_key = self.make_key(descriptor)
        context_info = {"key": cache_key, "operation": "set", "cache_dir": self.cache_dir}

        with ErrorContext(context_info, CacheError, "CACHE_WRITE_ERROR"):
            cache_path = self._get_cache_path(cache_key)
            os.makedirs(os.path.dirname(cache_path), exist_ok=True)
            temp_path = f"{cache_path}.tmp"

            try:
                if self.compression:
                    with gzip.open(temp_path, 'wt', encoding='utf-8') as f:
                        json.dump(data, f)
                else:
                    with open(temp_path, 'w', encoding='utf-8') as f:
                        json.dump(data, f)

                os.replace(temp_path, cache_path)
                logger.debug(f"Cached result under {cache_key}")
                return True

            except (TypeError, ValueError, OSError) as e:
                logger.warning(f"Error writing cache for {cache_key}: {e}")
                try:
                    if os.path.exists(temp_path):
                        os.remove(temp_path)
                except OSError:
                    pass
                return False

    def invalidate(self, descriptor: Dict[str, Any]) -> bool:
        """Invalidate a cached cell result

        Returns:
            bool: True if an entry was removed
        """
        cache_key = self.make_key(descriptor)
        success = False
        for cache_path in self._paths(cache_key):
            if os.path.exists(cache_path):
                try:
                    os.remove(cache_path)
                    success = True
                except OSError as e:
                    logger.warning(f"Error invalidating cache at {cache_path}: {e}")

        if success:
            logger.debug(f"Invalidated cache for {cache_key}")
        return success

    def _entries(self):
        for filename in os.listdir(self.cache_dir):
            if filename.endswith(".json") or filename.endswith(".json.gz"):
                yield filename, os.path.join(self.cache_dir, filename)

    def clear(self) -> int:
        """Clear all cached results

        Returns:
            int: Number of cache entries cleared
        """
        count = 0
        for filename, file_path in self._entries():
            try:
                os.remove(file_path)
                count += 1
            except OSError as e:
                logger.warning(f"Error removing cache file {filename}: {e}")

        logger.info(f"Cleared {count} cache entries")
        return count

    def get_stats(self) -> Dict:
        """Get cache statistics

        Returns:
            Dict: Cache statistics
        """
        stats: Dict[str, Any] = {
            "cache_dir": self.cache_dir,
            "ttl": self.ttl,
            "compression": self.compression,
            "entry_count": 0,
            "size_bytes": 0,
            "oldest_entry": None,
            "newest_entry": None
        }

        oldest_time = float('inf')
        newest_time = 0.0

        for filename, file_path in self._entries():
            stats["entry_count"] += 1
            try:
                stats["size_bytes"] += os.path.getsize(file_path)
                mtime = os.path.getmtime(file_path)
            except OSError as e:
                logger.warning(f"Error getting stats for {filename}: {e}")
                continue
            if mtime < oldest_time:
                oldest_time = mtime
                stats["oldest_entry"] = datetime.fromtimestamp(mtime).isoformat()
            if mtime > newest_time:
                newest_time = mtime
                stats["newest_entry"] = datetime.fromtimestamp(mtime).isoformat()

        stats["size_human"] = format_bytes(stats["size_bytes"])
        return stats

    def cleanup(self, max_age: Optional[int] = None) -> int:
        """Clean up expired cache entries

        Args:
            max_age: Maximum age in seconds (default: self.ttl)

        Returns:
            int: Number of entries removed
        """
        max_age = max_age or self.ttl
        count = 0
        now = time.time()

        for filename, file_path in self._entries():
            try:
                if now - os.path.getmtime(file_path) > max_age:
                    os.remove(file_path)
                    count += 1
            except OSError as e:
                logger.warning(f"Error cleaning up {filename}: {e}")

        logger.info(f"Cleaned up {count} expired cache entries")
        return count

class NullCache:
    """Stand-in used when caching is disabled; stores nothing"""

    def get(self, descriptor: Dict[str, Any]) -> Optional[Dict]:
        return None

    def set(self, descriptor: Dict[str, Any], data: Dict) -> bool:
        return False

    def invalidate(self, descriptor: Dict[str, Any]) -> bool:
        return False

    def clear(self) -> int:
        return 0

    def get_stats(self) -> Dict:
        return {"disabled": True}

    def cleanup(self, max_age: Optional[int] = None) -> int:
        return 0

_cache_instance: Optional[ResultCache] = None

def get_cache(cache_dir: Optional[str] = None, ttl: Optional[int] = None,
             compression: Optional[bool] = None, force: bool = False):
    """Get the cache instance (singleton)

    Args:
        cache_dir: Directory to store cache files (default: from config)
        ttl: Cache time-to-live in seconds (default: from config)
        compression: Whether to compress cached data (default: from config)
        force: Return a real cache even when caching is disabled (cache management)

    Returns:
        ResultCache or NullCache
    """
    global _cache_instance

    cache_config = get_config().get_cache_config()
    if not (force or cache_config.get("enabled", False)):
        logger.debug("Cache is disabled in configuration")
        return NullCache()

    if _cache_instance is None or (cache_dir and
                                   os.path.expanduser(cache_dir) != _cache_instance.cache_dir):
        _cache_instance = ResultCache(cache_dir, ttl, compression)

    return _cache_instance

def reset_cache() -> None:
    """Drop the cache singleton (used by tests)"""
    global _cache_instance
    _cache_instance = None
