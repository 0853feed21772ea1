from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st

from citescribe.corpus import bib_to_work, parse_bibtex, serialize_bibtex, split_authors


def test_single_entry_hand_parse():
    parsed = parse_bibtex("@article{k1, title={A}, year={2020}}")
    assert len(parsed.entries) == 1
    entry = parsed.entries[0]
    assert entry.cite_key == "k1"
    assert entry.entry_type == "article"
    assert entry.fields == {"title": "A", "year": "2020"}
    assert parsed.diagnostics == []


def test_empty_file():
    parsed = parse_bibtex("")
    assert parsed.entries == [] and parsed.diagnostics == []


def test_duplicate_cite_key_reported_both_returned():
    parsed = parse_bibtex("@article{k1, title={A}}\n@misc{k1, title={B}}")
    assert [e.cite_key for e in parsed.entries] == ["k1", "k1"]
    assert any(d.kind == "duplicate_key" for d in parsed.diagnostics)


def test_comment_and_preamble_skipped():
    src = """
    @comment{this is ignored}
    @preamble{"\\newcommand{\\x}{y}"}
    @inproceedings{p1, title={Real entry}}
    """
    parsed = parse_bibtex(src)
    assert [e.cite_key for e in parsed.entries] == ["p1"]


def test_string_macro_expansion_and_concat():
    src = """
    @string{conf = "Great Conference"}
    @article{k1, booktitle = conf # " 2020", title={T}}
    """
    parsed = parse_bibtex(src)
    assert parsed.entries[0].fields["booktitle"] == "Great Conference 2020"


def test_unknown_macro_is_diagnostic_not_fatal():
    parsed = parse_bibtex("@article{k1, journal = nothere, title={T}}")
    assert parsed.entries[0].fields["journal"] == ""
    assert any(d.kind == "unknown_macro" for d in parsed.diagnostics)


def test_unbalanced_braces_skip_entry_keep_rest():
    src = "@article{bad, title={unclosed}\n@article{good, title={Fine}}"
    parsed = parse_bibtex(src)
    assert [e.cite_key for e in parsed.entries] == ["good"]
    assert any(d.kind == "unbalanced_braces" for d in parsed.diagnostics)


def test_values_debraced_and_whitespace_normalized():
    parsed = parse_bibtex("@article{k, title={The {BIG}\n  Result}}")
    assert parsed.entries[0].fields["title"] == "The BIG Result"


def test_quoted_values_with_protected_braces():
    parsed = parse_bibtex('@article{k, title="A {\\"quoted\\"} thing"}')
    assert "thing" in parsed.entries[0].fields["title"]


def test_round_trip_field_equality():
    src = """
    @article{k1, title={A Study}, author={Doe, Jane and Roe, Rick}, year={2019}}
    @inproceedings{k2, title={Another}, booktitle={Proc of X}, pages={1--9}}
    """
    first = parse_bibtex(src)
    second = parse_bibtex(serialize_bibtex(first.entries))
    assert [(e.cite_key, e.entry_type, e.fields) for e in first.entries] == [
        (e.cite_key, e.entry_type, e.fields) for e in second.entries
    ]


_value_text = st.text(
    alphabet=st.characters(
        min_codepoint=32, max_codepoint=126, blacklist_characters='{}"@\\#='
    ),
    min_size=1,
    max_size=30,
).map(lambda s: " ".join(s.split())).filter(bool)


@settings(max_examples=100, deadline=None)
@given(
    st.dictionaries(
        st.sampled_from(["title", "author", "year", "journal", "note"]),
        _value_text,
        min_size=1,
        max_size=5,
    )
)
def test_round_trip_property(fields):
    src = "@article{key1,\n" + "\n".join(
        f"  {name} = {{{value}}}," for name, value in fields.items()
    ) + "\n}"
    first = parse_bibtex(src)
    assert len(first.entries) == 1
    second = parse_bibtex(serialize_bibtex(first.entries))
    assert second.entries[0].fields == first.entries[0].fields


def test_bib_to_work_mapping():
    parsed = parse_bibtex(
        "@article{k1, title={A Title}, year={2020}, author={Doe, Jane and Roe, Rick},"
        " journal={J of X}}"
    )
    work = bib_to_work(parsed.entries[0])
    assert work is not None
    assert work.id == "bib:k1"
    assert work.year == 2020
    assert work.citation_count == 0
    assert work.authors == ("Doe, Jane", "Roe, Rick")
    assert work.venue == "J of X"


def test_bib_to_work_requires_title():
    parsed = parse_bibtex("@misc{k1, year={2020}}")
    assert bib_to_work(parsed.entries[0]) is None


def test_split_authors_on_and_token():
    assert split_authors("Doe, Jane and Roe, Rick") == ("Doe, Jane", "Roe, Rick")
    assert split_authors("Brand and Band") == ("Brand", "Band")
    # "and" inside a name is not a separator unless surrounded by spaces
    assert split_authors("Anderson, Greta") == ("Anderson, Greta",)
