from __future__ import annotations

import datetime as dt
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from citescribe.corpus import Work
from citescribe.introgen import (
    ChainStageError,
    ClaimExtractionError,
    NoveltyVote,
    RecencyPolicy,
    classify_novelty,
    compose_intro,
    entailment_probability,
    entailment_score,
    extract_claims,
    extract_paragraphs,
    run_intro_chain,
    split_references,
    summarize_results,
    vote_filter,
)
from citescribe.providers import (
    GenerationRequest,
    GenerationResult,
    ScorelessGenerator,
    ScriptedGenerator,
    ScriptedScorer,
)

POLICY = RecencyPolicy(y_years=5, reference_date=dt.date(2025, 6, 1))

LONG_A = (
    "This opening paragraph describes the overall system design in enough detail to pass "
    "the minimum length filter, covering the retrieval pipeline, the scoring model, and "
    "the way results are surfaced to the author during writing sessions."
)
LONG_B = (
    "A second substantial paragraph reports the evaluation protocol, including the way "
    "ground truth citations were buried among distractors of varying difficulty and the "
    "metrics used to judge whether the system recovered them reliably."
)
LONG_C = (
    "A third paragraph discusses limitations and future work, noting that the current "
    "system only considers textual context and citation counts, and sketching how "
    "richer author-intent signals could be folded into the ranking in later versions."
)


def _ref(i, year, abstract="An abstract."):
    return Work(id=f"R{i}", title=f"Ref {i}", abstract=abstract, year=year)


# -- paragraphs ----------------------------------------------------------------


def test_extract_two_paragraphs():
    manuscript = f"{LONG_A}\n\n{LONG_B}"
    assert extract_paragraphs(manuscript) == [LONG_A, LONG_B]


def test_figure_environment_dropped():
    manuscript = f"{LONG_A}\n\n\\begin{{figure}}\n{LONG_B}\n\\end{{figure}}\n\n{LONG_C}"
    assert extract_paragraphs(manuscript) == [LONG_A, LONG_C]


def test_comment_lines_removed_before_split():
    manuscript = f"% a comment line\n{LONG_A} % trailing comment\n\n{LONG_B}"
    paragraphs = extract_paragraphs(manuscript)
    assert paragraphs[0] == LONG_A
    assert "comment" not in paragraphs[0]


def test_escaped_percent_is_kept():
    text = ("We observe a 12\\% gain in this setting. " + LONG_A)
    assert "12\\%" in extract_paragraphs(text)[0]


def test_short_stub_paragraphs_dropped():
    manuscript = f"Introduction\n\n{LONG_A}\n\nConclusion"
    assert extract_paragraphs(manuscript) == [LONG_A]


def test_empty_manuscript():
    assert extract_paragraphs("") == []


# -- reference split -------------------------------------------------------------


def test_split_references_examples():
    refs = [_ref(1, 2018), _ref(2, 2022)]
    split = split_references(refs, PolicyY5_2025 := RecencyPolicy(5, dt.date(2025, 1, 1)))
    assert [w.id for w in split.canonical] == ["R1"]
    assert [w.id for w in split.recent] == ["R2"]


def test_split_boundary_year_is_recent():
    split = split_references([_ref(1, 2020)], RecencyPolicy(5, dt.date(2025, 1, 1)))
    assert split.canonical == [] and [w.id for w in split.recent] == ["R1"]


def test_split_empty():
    split = split_references([], POLICY)
    assert (split.canonical, split.recent) == ([], [])


def test_split_yearless_reported():
    refs = [_ref(1, 2010), Work(id="NY", title="No year", abstract="a"), _ref(2, 2024)]
    split = split_references(refs, POLICY)
    assert [w.id for w in split.yearless] == ["NY"]


@settings(max_examples=100, deadline=None)
@given(st.lists(st.one_of(st.none(), st.integers(min_value=1900, max_value=2026)), max_size=20))
def test_split_is_partition_of_year_bearing(years):
    refs = [
        Work(id=f"r{i}", title="t", abstract="a", year=year) for i, year in enumerate(years)
    ]
    split = split_references(refs, POLICY)
    canon = {w.id for w in split.canonical}
    recent = {w.id for w in split.recent}
    assert canon.isdisjoint(recent)
    assert canon | recent == {w.id for w in refs if w.year is not None}


# -- novelty votes -----------------------------------------------------------------


def test_classify_yes_with_rationale(templates):
    gen = ScriptedGenerator([("Respond YES or NO", "YES — introduces a new metric.")])
    vote = classify_novelty("p", "abs", _ref(1, 2020), gen, templates["intro_novelty"], 3)
    assert vote.verdict == "yes"
    assert vote.paragraph_index == 3
    assert "introduces a new metric" in vote.rationale


def test_classify_no_case_insensitive(templates):
    gen = ScriptedGenerator([("Respond YES or NO", "no, restates prior work")])
    vote = classify_novelty("p", "abs", _ref(1, 2020), gen, templates["intro_novelty"])
    assert vote.verdict == "no"


def test_classify_unparseable_twice_records_no(templates):
    gen = ScriptedGenerator([("Respond YES or NO", ["maybe", "maybe"])])
    vote = classify_novelty("p", "abs", _ref(1, 2020), gen, templates["intro_novelty"])
    assert vote.verdict == "no"
    assert vote.rationale == "unparseable"


def test_classify_requires_reference_abstract(templates):
    with pytest.raises(ValueError):
        classify_novelty(
            "p", "abs", Work(id="x", title="t"), ScriptedGenerator(), templates["intro_novelty"]
        )


def _votes(spec):
    # spec: {paragraph_index: (yes, no)}
    votes = []
    for idx, (yes, no) in spec.items():
        votes += [NoveltyVote(idx, f"r{i}", "yes", "") for i in range(yes)]
        votes += [NoveltyVote(idx, f"r{100 + i}", "no", "") for i in range(no)]
    return votes


def test_vote_filter_majorities():
    paragraphs = ["p0", "p1"]
    result = vote_filter(paragraphs, _votes({0: (3, 1), 1: (1, 3)}), 0.5)
    assert result.kept == ["p0"]  # 0.75 >= 0.5, 0.25 < 0.5


def test_vote_filter_zero_threshold_keeps_all_voted():
    result = vote_filter(["p0", "p1"], _votes({0: (0, 2), 1: (1, 0)}), 0.0)
    assert result.kept == ["p0", "p1"]


def test_vote_filter_zero_vote_paragraph_reported():
    result = vote_filter(["p0", "p1"], _votes({0: (1, 0)}), 0.0)
    assert result.kept == ["p0"]
    assert result.zero_vote_indices == [1]


def test_vote_filter_rejects_bad_index():
    with pytest.raises(ValueError):
        vote_filter(["p0"], [NoveltyVote(5, "r", "yes", "")])


@settings(max_examples=100, deadline=None)
@given(
    st.dictionaries(
        st.integers(min_value=0, max_value=4),
        st.tuples(st.integers(0, 4), st.integers(0, 4)),
        max_size=5,
    ),
    st.floats(min_value=0, max_value=1),
    st.floats(min_value=0, max_value=1),
)
def test_vote_filter_monotone_in_keep_fraction(spec, f1, f2):
    lo, hi = min(f1, f2), max(f1, f2)
    paragraphs = [f"p{i}" for i in range(5)]
    votes = _votes(spec)
    kept_lo = set(vote_filter(paragraphs, votes, lo).kept_indices)
    kept_hi = set(vote_filter(paragraphs, votes, hi).kept_indices)
    assert kept_hi <= kept_lo


def test_collect_votes_caps_refs_nearest_by_embedding(templates):
    from citescribe.introgen import collect_votes
    from citescribe.providers import HashEmbedder

    refs = [
        Work(id=f"R{i}", title=f"Ref about {topic}", abstract=f"All about {topic}.", year=2020)
        for i, topic in enumerate(
            ["zebra retrieval", "zebra ranking", "zebra suggestion", "soil chemistry", "galaxy surveys"]
        )
    ]
    gen = ScriptedGenerator([("Respond YES or NO", "YES ok")])
    votes = collect_votes(
        ["A paragraph about zebra retrieval and zebra ranking systems."],
        "abs",
        refs,
        gen,
        templates["intro_novelty"],
        max_refs_per_paragraph=3,
        embedder=HashEmbedder(dimension=64, seed=0),
    )
    voted_ids = {v.reference_id for v in votes}
    assert len(votes) == 3
    assert {"R0", "R1", "R2"} == voted_ids  # the zebra refs, nearest in cosine space


def test_collect_votes_without_embedder_takes_first_n(templates):
    from citescribe.introgen import collect_votes

    refs = [Work(id=f"R{i}", title=f"T{i}", abstract="a", year=2020) for i in range(6)]
    gen = ScriptedGenerator([("Respond YES or NO", "YES ok")])
    votes = collect_votes(["p"], "abs", refs, gen, templates["intro_novelty"], max_refs_per_paragraph=4)
    assert [v.reference_id for v in votes] == ["R0", "R1", "R2", "R3"]


def test_collect_votes_concurrent_matches_serial(templates):
    from citescribe.introgen import collect_votes

    refs = [Work(id=f"R{i}", title=f"T{i}", abstract="a", year=2020) for i in range(4)]

    def run(workers):
        gen = ScriptedGenerator([("Respond YES or NO", "YES ok")])
        return collect_votes(
            ["para one", "para two"], "abs", refs, gen, templates["intro_novelty"],
            workers=workers,
        )

    assert run(1) == run(4)


# -- summarize ----------------------------------------------------------------------


def test_summarize_scripted(templates):
    gen = ScriptedGenerator([("Now summarize the results", "A tidy summary.")])
    assert summarize_results(["p one"], gen, templates["intro_summarize"]) == "A tidy summary."


def test_summarize_single_paragraph_prompt_contains_it_once(templates):
    seen = []

    class Recorder:
        def generate(self, request):
            seen.append(request.prompt)
            return GenerationResult(text="s")

    summarize_results(["the only paragraph"], Recorder(), templates["intro_summarize"])
    assert seen[0].count("the only paragraph") == 1


def test_summarize_empty_kept_list_directs_lower_threshold(templates):
    from citescribe.introgen import ChainError

    with pytest.raises(ChainError, match="keep_fraction"):
        summarize_results([], ScriptedGenerator(), templates["intro_summarize"])


def test_summarize_hierarchical_fallback_respects_budget(templates):
    prompts = []

    class Recorder:
        def generate(self, request):
            prompts.append(request.prompt)
            return GenerationResult(text=f"batch summary {len(prompts)}")

    paragraphs = [f"Paragraph {i}: " + "content " * 40 for i in range(30)]
    budget = 1500
    result = summarize_results(paragraphs, Recorder(), templates["intro_summarize"], budget)
    assert len(prompts) > 1  # batched, then re-summarized
    assert all(len(p) <= budget for p in prompts)
    assert result.startswith("batch summary")


# -- compose ---------------------------------------------------------------------------


def test_compose_numbering_offset_maps_recent(templates):
    canonical = [_ref(1, 2000), _ref(2, 2005)]
    recent = [_ref(3, 2024)]
    gen = ScriptedGenerator([("Now write the paper introduction", "'''\nBuilding on [3], we act.\n'''")])
    result = compose_intro("T", "summary", canonical, recent, gen, templates["intro_compose"])
    assert result.citation_map == {3: "R3"}
    assert result.intro_text == "Building on [3], we act."


def test_compose_strips_fences(templates):
    gen = ScriptedGenerator([("Now write the paper introduction", "'''\nFenced text [1].\n'''")])
    result = compose_intro("T", "s", [_ref(1, 2000)], [], gen, templates["intro_compose"])
    assert "'''" not in result.intro_text


def test_compose_dangling_bracket_reported(templates):
    gen = ScriptedGenerator([("Now write the paper introduction", "Cites [9] bravely. Also [1].")])
    result = compose_intro(
        "T", "s", [_ref(1, 2000), _ref(2, 2001)], [_ref(3, 2024)], gen, templates["intro_compose"]
    )
    assert result.dangling == [9]
    assert "[9]" in result.intro_text
    assert result.citation_map == {1: "R1"}


def test_compose_requires_a_reference(templates):
    with pytest.raises(ValueError):
        compose_intro("T", "s", [], [], ScriptedGenerator(), templates["intro_compose"])


# -- claims and entailment ----------------------------------------------------------


def test_extract_claims_numbered_lines(templates):
    gen = ScriptedGenerator(
        [("novel claims", "1. First claim.\n2. Second claim.\n3. Third.\n4. Fourth.")]
    )
    claims = extract_claims("intro text", 4, gen, templates["eval_claims"])
    assert claims == ["First claim.", "Second claim.", "Third.", "Fourth."]


def test_extract_claims_tolerates_blank_lines(templates):
    gen = ScriptedGenerator(
        [("novel claims", "1. A.\n\n2. B.\n\n\n3. C.\n4. D.")]
    )
    assert len(extract_claims("intro", 4, gen, templates["eval_claims"])) == 4


def test_extract_claims_caps_at_num_claims(templates):
    gen = ScriptedGenerator([("novel claims", "\n".join(f"{i}. C{i}" for i in range(1, 8)))])
    assert len(extract_claims("intro", 3, gen, templates["eval_claims"])) == 3


def test_extract_claims_no_numbered_lines_errors(templates):
    gen = ScriptedGenerator([("novel claims", "no structure at all")])
    with pytest.raises(ClaimExtractionError):
        extract_claims("intro", 4, gen, templates["eval_claims"])


def test_extract_claims_range_check(templates):
    with pytest.raises(ValueError):
        extract_claims("intro", 2, ScriptedGenerator(), templates["eval_claims"])


def test_entailment_probability_symmetry_and_value():
    assert entailment_probability(-1.5, -1.5) == 0.5
    assert entailment_probability(-1.0, -2.0) == pytest.approx(0.731059, abs=1e-6)
    assert entailment_probability(-0.5, -2.5) == pytest.approx(
        1 / (1 + math.exp(-2.0)), abs=1e-12
    )


@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=-700, max_value=0),
    st.floats(min_value=-700, max_value=0),
)
def test_entailment_probabilities_sum_to_one(l_yes, l_no):
    p_yes = entailment_probability(l_yes, l_no)
    # the complement is 1 - p_yes by construction, so the pair sums exactly
    assert p_yes + (1.0 - p_yes) == 1.0
    assert 0.0 <= p_yes <= 1.0
    # the swapped computation agrees with the complement to float precision
    assert entailment_probability(l_no, l_yes) == pytest.approx(1.0 - p_yes, abs=1e-12)


def test_entailment_score_label_and_probability(templates):
    gen = ScriptedGenerator([("Start your answer", "yes, consistent.")])
    scorer = ScriptedScorer({"yes": -1.0, "no": -2.0})
    result = entailment_score("h", "c", gen, scorer, templates["eval_entailment"])
    assert result.label == "yes"
    assert result.p_yes == pytest.approx(0.731059, abs=1e-6)


def test_entailment_score_without_scorer_label_only(templates):
    gen = ScriptedGenerator([("Start your answer", "no.")])
    result = entailment_score("h", "c", gen, None, templates["eval_entailment"])
    assert result.label == "no"
    assert result.p_yes is None


def test_entailment_scoreless_backend_label_only(templates):
    gen = ScorelessGenerator([("Start your answer", "yes.")])
    result = entailment_score("h", "c", gen, gen, templates["eval_entailment"])
    assert result.label == "yes"
    assert result.p_yes is None


# -- the full chain -----------------------------------------------------------------


def _chain_mocks():
    return ScriptedGenerator(
        [
            ("Respond YES or NO", ["YES a", "NO b", "YES c", "YES d", "NO e", "NO f"]),
            ("Now summarize the results", "The results summary."),
            ("Now write the paper introduction", "'''\nIntro citing [1] and [2].\n'''"),
        ]
    )


def _chain_refs():
    return [_ref(1, 2018), _ref(2, 2022)]


MANUSCRIPT = f"\\title{{A Chain Test}}\n\n{LONG_A}\n\n{LONG_B}\n\n{LONG_C}"


def test_run_intro_chain_full_scripted(templates):
    state = run_intro_chain(
        MANUSCRIPT,
        _chain_refs(),
        RecencyPolicy(5, dt.date(2025, 1, 1)),
        _chain_mocks(),
        templates,
        abstract="Our abstract.",
    )
    assert state.title == "A Chain Test"
    assert [w.id for w in state.canonical_refs] == ["R1"]
    assert [w.id for w in state.recent_refs] == ["R2"]
    assert len(state.votes) == 6
    # votes per paragraph: p0 YES/NO kept at 0.5, p1 YES/YES kept, p2 NO/NO dropped
    assert state.kept_paragraphs == [LONG_A, LONG_B]
    assert state.summary == "The results summary."
    assert state.intro_text == "Intro citing [1] and [2]."
    assert state.citation_map == {1: "R1", 2: "R2"}
    assert state.dangling_citations == []


def test_run_intro_chain_deterministic_trace_bytes(templates):
    def run():
        state = run_intro_chain(
            MANUSCRIPT,
            _chain_refs(),
            RecencyPolicy(5, dt.date(2025, 1, 1)),
            _chain_mocks(),
            templates,
            abstract="Our abstract.",
        )
        return json.dumps(state.to_json_dict(), sort_keys=True)

    assert run() == run()


def test_run_intro_chain_requires_abstract(templates):
    with pytest.raises(ChainStageError) as info:
        run_intro_chain(
            MANUSCRIPT, _chain_refs(), POLICY, _chain_mocks(), templates, abstract="  "
        )
    assert info.value.stage == "inputs"


def test_run_intro_chain_refs_without_abstracts(templates):
    bad_refs = [Work(id="x", title="t", year=2020)]
    with pytest.raises(ChainStageError) as info:
        run_intro_chain(MANUSCRIPT, bad_refs, POLICY, _chain_mocks(), templates, abstract="a")
    assert info.value.stage == "references"
    assert info.value.state.dropped_reference_ids == ["x"]


def test_run_intro_chain_stage_error_carries_partial_state(templates):
    class FailsCompose:
        def __init__(self):
            self.inner = _chain_mocks()

        def generate(self, request: GenerationRequest) -> GenerationResult:
            if "Now write the paper introduction" in request.prompt:
                from citescribe.providers import ProviderRejection

                raise ProviderRejection("model down")
            return self.inner.generate(request)

    with pytest.raises(ChainStageError) as info:
        run_intro_chain(
            MANUSCRIPT,
            _chain_refs(),
            RecencyPolicy(5, dt.date(2025, 1, 1)),
            FailsCompose(),
            templates,
            abstract="Our abstract.",
        )
    assert info.value.stage == "compose"
    assert info.value.state.summary == "The results summary."
    assert info.value.state.kept_paragraphs == [LONG_A, LONG_B]
