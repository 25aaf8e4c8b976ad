import numpy as np
import pytest

from tentctl.config import settings
from tentctl.tent_map import MapParams


@pytest.fixture(autouse=True)
def default_settings(monkeypatch):
    """Tests run against built-in defaults whatever the local .env says"""
    monkeypatch.setattr(settings, "precision", None)
    monkeypatch.setattr(settings, "workers", 1)
    monkeypatch.setattr(settings, "max_iters", 1000)
    monkeypatch.setattr(settings, "timezone", "UTC")
    monkeypatch.setattr(settings, "write_manifest", True)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def h3():
    return MapParams(3)


@pytest.fixture
def h4():
    return MapParams(4)
