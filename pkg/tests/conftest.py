import os

import pytest
from hypothesis import HealthCheck, settings

from quadclimb.config import default_model

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("fast", max_examples=15, deadline=None)
settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "fast"))


@pytest.fixture(scope="session")
def climbing_model():
    return default_model("climbing_6dof")


@pytest.fixture(scope="session")
def walking_model():
    return default_model("walking_3dof")


@pytest.fixture
def isolated_env(monkeypatch, tmp_path):
    """Run with a clean working directory and no QUADCLIMB_* variables."""
    for key in list(os.environ):
        if key.startswith("QUADCLIMB_"):
            monkeypatch.delenv(key)
    monkeypatch.chdir(tmp_path)
    return tmp_path
