from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from citescribe.providers.templating import load_templates

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def templates():
    return load_templates()


@pytest.fixture(scope="session")
def works10_path() -> Path:
    return DATA_DIR / "works10.jsonl"


@pytest.fixture()
def data_dir() -> Path:
    return DATA_DIR
