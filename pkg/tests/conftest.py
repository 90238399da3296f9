from pathlib import Path

import pytest

from aimdalloc import compare_modes, parse_config

REPO_ROOT = Path(__file__).resolve().parents[1]
BUNDLED_CONFIG = REPO_ROOT / "configs" / "tourist_center.json"


@pytest.fixture(scope="session")
def bundled_config():
    return parse_config(BUNDLED_CONFIG)


@pytest.fixture(scope="session")
def reference_comparison(bundled_config):
    """Full-length deterministic vs stochastic runs on the bundled scenario."""
    return compare_modes(bundled_config)
