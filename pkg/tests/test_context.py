from __future__ import annotations

import pytest

from citescribe.recommend import CITE_TOKEN, ContextWindow, make_context, split_sentences


def spans_text(doc):
    return [doc[a:b] for a, b in split_sentences(doc)]


def test_three_sentence_hand_segmentation():
    assert spans_text("A. B. C.") == ["A.", "B.", "C."]


def test_cursor_at_end_of_middle_sentence():
    ctx = make_context("A. B. C.", 5)
    assert ctx.previous_sentence == "A."
    assert ctx.masked_sentence == "B. CITE-HERE"
    assert ctx.next_sentence == "C."


def test_cursor_zero_single_sentence():
    ctx = make_context("Only one sentence here.", 0)
    assert ctx.previous_sentence is None
    assert ctx.next_sentence is None
    assert ctx.masked_sentence == "CITE-HERE Only one sentence here."


def test_abbreviation_not_split():
    doc = "We cite prior work, e.g. Smith reported gains. Later studies agreed."
    assert spans_text(doc) == [
        "We cite prior work, e.g. Smith reported gains.",
        "Later studies agreed.",
    ]


def test_et_al_guard():
    doc = "Results from Doe et al. Show that things work. A second sentence."
    assert spans_text(doc)[0] == "Results from Doe et al. Show that things work."


def test_no_split_inside_parentheses():
    doc = "The result (see Fig. 2. For details) holds. Next sentence."
    assert spans_text(doc) == ["The result (see Fig. 2. For details) holds.", "Next sentence."]


def test_question_and_exclamation_terminators():
    assert spans_text("Really? Yes! Fine.") == ["Really?", "Yes!", "Fine."]


def test_empty_document():
    ctx = make_context("", 0)
    assert ctx.masked_sentence == CITE_TOKEN
    assert ctx.previous_sentence is None and ctx.next_sentence is None


def test_cursor_out_of_bounds():
    with pytest.raises(ValueError, match="cursor"):
        make_context("abc", 9)
    with pytest.raises(ValueError, match="cursor"):
        make_context("abc", -1)


def test_token_padding_mid_word_boundary():
    ctx = make_context("Alpha beta gamma.", 6)
    assert ctx.masked_sentence == "Alpha CITE-HERE beta gamma."


def test_token_between_non_space_chars_gets_both_spaces():
    ctx = make_context("Alphabeta.", 5)
    assert ctx.masked_sentence == "Alpha CITE-HERE beta."


def test_cursor_past_end_attaches_to_last_sentence():
    doc = "First. Second."
    ctx = make_context(doc, len(doc))
    assert ctx.previous_sentence == "First."
    assert ctx.masked_sentence == "Second. CITE-HERE"


def test_window_invariant_exactly_one_token():
    with pytest.raises(ValueError):
        ContextWindow(None, "no token here", None)
    with pytest.raises(ValueError):
        ContextWindow(None, f"{CITE_TOKEN} twice {CITE_TOKEN}", None)


def test_query_fallback_text_strips_token():
    ctx = make_context("A useful sentence about retrieval.", 9)
    assert CITE_TOKEN in ctx.masked_sentence
    fallback = ctx.query_fallback_text()
    assert CITE_TOKEN not in fallback
    assert "  " not in fallback
    assert fallback == "A useful sentence about retrieval."
