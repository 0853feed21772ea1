from __future__ import annotations

import datetime as dt
import gzip
import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citescribe.corpus import (
    FilterPolicy,
    TrigramLanguageDetector,
    Work,
    detect_language,
    filter_works,
    load_works,
    parse_works,
)

NOW = dt.date(2025, 3, 1)
POLICY = FilterPolicy(min_citations=1, recent_uncited_months=18)


def test_parse_works_empty_stream():
    works, skipped = parse_works(io.StringIO(""))
    assert works == [] and skipped == 0


def test_parse_works_skips_garbage_lines():
    lines = [
        json.dumps({"id": "A", "title": "T1", "cited_by_count": 1}),
        "this is not json",
        json.dumps({"id": "B", "title": "T2", "cited_by_count": 0}),
        json.dumps({"id": "C", "title": "T3"}),
    ]
    works, skipped = parse_works(lines)
    assert [w.id for w in works] == ["A", "B", "C"]
    assert skipped == 1


def test_parse_works_missing_required_fields_counted():
    lines = [
        json.dumps({"title": "no id"}),
        json.dumps({"id": "X"}),
        json.dumps({"id": "Y", "title": "ok"}),
    ]
    works, skipped = parse_works(lines)
    assert [w.id for w in works] == ["Y"]
    assert skipped == 2


def test_parse_works_absent_abstract_is_none():
    works, _ = parse_works([json.dumps({"id": "A", "title": "T"})])
    assert works[0].abstract is None


def test_parse_works_rejects_out_of_range_year():
    lines = [
        json.dumps({"id": "A", "title": "T", "publication_year": 1200}),
        json.dumps({"id": "B", "title": "T", "publication_year": 2999}),
        json.dumps({"id": "C", "title": "T", "publication_year": 2020}),
    ]
    works, skipped = parse_works(lines, now=NOW)
    assert [w.id for w in works] == ["C"]
    assert skipped == 2


def test_load_works_gzip(tmp_path, works10_path):
    gz = tmp_path / "works.jsonl.gz"
    gz.write_bytes(gzip.compress(works10_path.read_bytes()))
    plain, _ = load_works(works10_path)
    zipped, _ = load_works(gz)
    assert [w.id for w in plain] == [w.id for w in zipped]


def test_filter_policy_fixture_hand_count(works10_path):
    works, skipped = load_works(works10_path)
    assert len(works) == 10 and skipped == 0
    kept = filter_works(works, POLICY, now=NOW)
    assert [w.id for w in kept] == ["W1", "W2", "W4", "W5", "W7", "W9"]


def test_filter_noop_policy_is_identity(works10_path):
    works, _ = load_works(works10_path)
    assert filter_works(works, FilterPolicy(), now=NOW) == works


def test_uncited_rescue_boundary():
    young = Work(id="a", title="t", year=2025, citation_count=0)
    old = Work(id="b", title="t", year=2023, citation_count=0)
    kept = filter_works([young, old], POLICY, now=NOW)
    assert [w.id for w in kept] == ["a"]  # ages 2 and 26 months against window 18


def test_require_english_without_detector_passes_unknown():
    unknown = Work(id="a", title="Sans langue")
    tagged = Work(id="b", title="t", language="de")
    english = Work(id="c", title="t", language="en")
    policy = FilterPolicy(require_english=True)
    kept = filter_works([unknown, tagged, english], policy, now=NOW)
    assert [w.id for w in kept] == ["a", "c"]


def test_require_english_with_detector_excludes_unknown():
    detector = TrigramLanguageDetector()
    foreign = Work(
        id="a",
        title="Der schnelle braune Fuchs springt ueber den faulen Hund im Wald",
    )
    english = Work(
        id="b",
        title="The quick brown fox jumps over the lazy dog in the forest",
    )
    opaque = Work(id="c", title="zzzz qqqq")
    policy = FilterPolicy(require_english=True)
    kept = filter_works([foreign, english, opaque], policy, now=NOW, detector=detector)
    assert [w.id for w in kept] == ["b"]


def test_detect_language_examples():
    assert detect_language("The quick brown fox jumps over the lazy dog") == "en"
    assert detect_language("") is None
    assert detect_language("Der schnelle braune Fuchs springt") != "en"


_work_strategy = st.builds(
    Work,
    id=st.text(min_size=1, max_size=8, alphabet="abcdef0123456789"),
    title=st.text(min_size=1, max_size=20),
    year=st.one_of(st.none(), st.integers(min_value=1990, max_value=2025)),
    citation_count=st.integers(min_value=0, max_value=40),
)
_policy_strategy = st.builds(
    FilterPolicy,
    require_english=st.booleans(),
    min_citations=st.integers(min_value=0, max_value=10),
    recent_uncited_months=st.one_of(st.none(), st.integers(min_value=0, max_value=60)),
)


@settings(max_examples=150, deadline=None)
@given(st.lists(_work_strategy, max_size=25), _policy_strategy)
def test_filter_is_order_preserving_subset_and_idempotent(works, policy):
    kept = filter_works(works, policy, now=NOW)
    it = iter(works)
    assert all(any(w is x for x in it) for w in kept)  # subsequence
    assert filter_works(kept, policy, now=NOW) == kept  # idempotent


@settings(max_examples=150, deadline=None)
@given(
    st.lists(_work_strategy, max_size=25),
    st.integers(min_value=0, max_value=10),
    st.integers(min_value=0, max_value=5),
)
def test_raising_min_citations_never_grows_result(works, base, bump):
    lo = filter_works(works, FilterPolicy(min_citations=base), now=NOW)
    hi = filter_works(works, FilterPolicy(min_citations=base + bump), now=NOW)
    assert set(w.id for w in hi) <= set(w.id for w in lo) or [w.id for w in hi] == [
        w.id for w in lo
    ]
    assert len(hi) <= len(lo)


def test_work_invariants():
    with pytest.raises(ValueError):
        Work(id="", title="t")
    with pytest.raises(ValueError):
        Work(id="a", title="t", citation_count=-1)
