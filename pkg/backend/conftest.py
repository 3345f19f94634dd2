import numpy as np
import pytest
from hypothesis import settings as hypothesis_settings

from app.core.cache import cache_manager
from app.services.module_spaces import parse_module

hypothesis_settings.register_profile("chiralcalc", derandomize=True, deadline=None, max_examples=60)
hypothesis_settings.load_profile("chiralcalc")


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def module():
    """Rank two module with generators in degrees 0 and 1"""
    return parse_module("module a:0 b:1")


@pytest.fixture(autouse=True)
def fresh_cache():
    cache_manager.clear()
    yield
    cache_manager.clear()
