from __future__ import annotations

import json
from pathlib import Path

import pytest

from c2i.imagebuf import load_assets

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_assets():
    return load_assets(FIXTURES / "assets")


@pytest.fixture(scope="session")
def fixture_spec_paths():
    paths = sorted((FIXTURES / "specs").glob("*.json"))
    assert len(paths) == 12, "golden suite expects 12 checked-in specs"
    return paths


@pytest.fixture(scope="session")
def golden_digests():
    return json.loads((FIXTURES / "golden" / "digests.json").read_text())
