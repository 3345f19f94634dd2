from app.core.cache import CacheManager, cached


def test_cache_set_get_and_stats():
    """Test basic cache operations"""
    cache = CacheManager(max_entries=10)
    assert cache.get("missing") is None
    assert cache.set("k", 1)
    assert cache.exists("k")
    assert cache.get("k") == 1
    stats = cache.get_stats()
    assert (stats["hits"], stats["misses"], stats["entries"]) == (1, 1, 1)
    assert stats["hit_rate"] == 50.0
    assert cache.delete("k")
    assert not cache.delete("k")


def test_cache_evicts_oldest():
    """Test that a full cache drops the least recently used entry"""
    cache = CacheManager(max_entries=2)
    cache.set("a", 1)
    cache.set("b", 2)
    cache.get("a")
    cache.set("c", 3)
    assert cache.exists("a") and cache.exists("c")
    assert not cache.exists("b")
    assert cache.get_stats()["evictions"] == 1


def test_disabled_cache_stores_nothing():
    cache = CacheManager(enabled=False)
    assert not cache.set("a", 1)
    assert not cache.exists("a")


def test_cached_decorator_memoizes_on_repr():
    """Test that repeated arguments are served from the cache"""
    cache = CacheManager()
    calls = []

    @cached("square", manager=cache)
    def square(x):
        calls.append(x)
        return x * x

    assert square(3) == 9
    assert square(3) == 9
    assert square(x=3) == 9
    assert calls == [3, 3]
    assert square.uncached(4) == 16
    assert cache.get_stats()["hits"] == 1
