from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from dualloops.core import load_structure

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_structure():
    cache = {}

    def load(name: str):
        if name not in cache:
            cache[name] = load_structure(FIXTURES / f"{name}.json")
        return cache[name]

    return load


@pytest.fixture(scope="session")
def corpus():
    """Every bound-3 solid mask, and one representative per symmetry class."""
    from dualloops.oracle import canonical_masks, enumerate_small_masks

    masks = enumerate_small_masks(3)
    return masks, np.unique(canonical_masks(masks, 3))


@pytest.fixture(scope="session")
def corpus_set(corpus):
    return set(corpus[0].tolist())
