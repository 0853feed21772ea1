"""Byte-exact golden checks for every shipped prompt template."""

from __future__ import annotations

import re

import pytest

from citescribe.providers.templating import TEMPLATE_NAMES

from conftest import GOLDEN_DIR
from golden_vars import GOLDEN_VARS


@pytest.mark.parametrize("name", TEMPLATE_NAMES)
def test_template_matches_golden_bytes(name, templates):
    rendered = templates[name].render(GOLDEN_VARS[name])
    golden = (GOLDEN_DIR / f"{name}.golden.txt").read_text(encoding="utf-8")
    assert rendered == golden


def test_fabricate_golden_contains_slot_token_once_in_context():
    golden = (GOLDEN_DIR / "cite_fabricate.golden.txt").read_text(encoding="utf-8")
    sentences_line = next(
        line for line in golden.splitlines() if line.startswith("SENTENCES:")
    )
    assert sentences_line.count("CITE-HERE") == 1


def test_score_golden_has_three_candidate_objects():
    golden = (GOLDEN_DIR / "cite_score.golden.txt").read_text(encoding="utf-8")
    keys = re.findall(r'"key": "([0-9a-f]{4})"', golden)
    assert keys == ["1f3a", "77c2", "b04d"]
    assert golden.count('"title":') == 3
    assert golden.count('"abstract":') == 3


def test_compose_golden_numbering_offset():
    golden = (GOLDEN_DIR / "intro_compose.golden.txt").read_text(encoding="utf-8")
    numbers = [int(n) for n in re.findall(r"REFERENCE #(\d+):", golden)]
    assert numbers == [1, 2, 3]
    fundamental, _, recent = golden.partition("RECENT RESULTS THAT THIS PAPER BUILDS ON:")
    assert "REFERENCE #3:" in recent and "REFERENCE #3:" not in fundamental
