import hashlib
import logging
from collections import OrderedDict
from functools import wraps
from typing import Any, Callable, Dict, Optional

from .config import settings

logger = logging.getLogger(__name__)

_MISSING = object()


class CacheManager:
    """Bounded in-memory memo cache for exact, immutable results"""

    def __init__(self, max_entries: int = settings.CACHE_MAX_ENTRIES, enabled: bool = settings.CACHE_ENABLED):
        self.max_entries = max_entries
        self.enabled = enabled
        self.memory_cache: "OrderedDict[str, Any]" = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def _generate_key(self, prefix: str, *args, **kwargs) -> str:
        """Generate cache key from prefix and arguments"""
        key_parts = [prefix]

        for arg in args:
            key_parts.append(repr(arg))

        # Sorted for consistency
        for key, value in sorted(kwargs.items()):
            key_parts.append(f"{key}:{value!r}")

        key_string = "|".join(key_parts)
        return hashlib.md5(key_string.encode()).hexdigest()

    def set(self, key: str, value: Any) -> bool:
        """Set cache value, evicting the oldest entry when full"""
        if not self.enabled:
            return False
        self.memory_cache[key] = value
        self.memory_cache.move_to_end(key)
        while len(self.memory_cache) > self.max_entries:
            self.memory_cache.popitem(last=False)
            self.evictions += 1
        return True

    def get(self, key: str, default: Any = None) -> Any:
        """Get cache value"""
        value = self.memory_cache.get(key, _MISSING)
        if value is _MISSING:
            self.misses += 1
            return default
        self.hits += 1
        self.memory_cache.move_to_end(key)
        return value

    def exists(self, key: str) -> bool:
        """Check if key exists"""
        return key in self.memory_cache

    def delete(self, key: str) -> bool:
        """Delete cache value"""
        return self.memory_cache.pop(key, _MISSING) is not _MISSING

    def clear(self):
        """Drop every entry and reset statistics"""
        self.memory_cache.clear()
        self.hits = 0
        self.misses = 0
        self.evictions = 0

    def get_stats(self) -> Dict[str, Any]:
        """Get cache statistics"""
        lookups = self.hits + self.misses
        return {
            "type": "memory",
            "enabled": self.enabled,
            "entries": len(self.memory_cache),
            "max_entries": self.max_entries,
            "hits": self.hits,
            "misses": self.misses,
            "evictions": self.evictions,
            "hit_rate": (self.hits / lookups * 100) if lookups else 0.0,
        }


# Global cache manager
cache_manager = CacheManager()


def cached(prefix: str, manager: Optional[CacheManager] = None) -> Callable:
    """Memoize a pure function on the repr of its arguments.

    Arguments must have a canonical ``repr`` (all domain value types do).
    """

    def decorator(func: Callable) -> Callable:
        @wraps(func)
        def wrapper(*args, **kwargs):
            mgr = manager or cache_manager
            if not mgr.enabled:
                return func(*args, **kwargs)
            key = mgr._generate_key(prefix, *args, **kwargs)
            value = mgr.get(key, _MISSING)
            if value is _MISSING:
                value = func(*args, **kwargs)
                mgr.set(key, value)
            return value

        wrapper.uncached = func
        return wrapper

    return decorator
