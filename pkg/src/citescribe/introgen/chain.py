"""Staged introduction drafting.

References split by age into fundamental and recent groups; each manuscript
paragraph is voted on for novelty against each reference abstract; surviving
paragraphs are summarized (hierarchically when the prompt budget forces it);
the final prompt composes an introduction citing numbered references. Every
intermediate artifact is retained on the chain state for tracing and
evaluation.
"""

from __future__ import annotations

import datetime as dt
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Optional, Sequence

import numpy as np

from ..corpus.works import Work
from ..providers.base import (
    CapabilityError,
    ContinuationScorer,
    Embedder,
    GenerationRequest,
    TextGenerator,
)
from ..providers.templating import PromptTemplate

_YES_NO_RE = re.compile(r"^\s*(yes|no)\b", re.IGNORECASE)
_CLAIM_LINE_RE = re.compile(r"^\s*\d+\.\s*(\S.*?)\s*$")
_BRACKET_RE = re.compile(r"\[(\d+)\]")
_TITLE_CMD_RE = re.compile(r"\\title\{([^{}]*)\}")
_DROP_ENVS = ("figure", "figure*", "table", "table*", "equation", "equation*", "align", "align*")

MIN_PARAGRAPH_CHARS = 200
DEFAULT_KEEP_FRACTION = 0.5
DEFAULT_Y_YEARS = 5
DEFAULT_REFS_PER_PARAGRAPH = 8


class ChainError(Exception):
    pass


@dataclass
class ChainStageError(ChainError):
    stage: str
    message: str
    state: Optional["IntroChainState"] = None

    def __str__(self):
        return f"introduction chain failed at stage {self.stage!r}: {self.message}"


class ClaimExtractionError(ChainError):
    pass


@dataclass(frozen=True)
class RecencyPolicy:
    """Split rule: published more than y_years before the reference date is
    fundamental ("canonical"); otherwise recent."""

    y_years: int = DEFAULT_Y_YEARS
    reference_date: dt.date = dt.date(2025, 1, 1)

    def __post_init__(self):
        if self.y_years < 1:
            raise ValueError("y_years must be >= 1")

    def is_canonical(self, year: int) -> bool:
        return (self.reference_date.year - year) > self.y_years


class ReferenceSplit(NamedTuple):
    canonical: list[Work]
    recent: list[Work]
    yearless: list[Work]


@dataclass(frozen=True)
class NoveltyVote:
    paragraph_index: int
    reference_id: str
    verdict: str  # "yes" | "no"
    rationale: str

    def to_dict(self) -> dict:
        return {
            "paragraph_index": self.paragraph_index,
            "reference_id": self.reference_id,
            "verdict": self.verdict,
            "rationale": self.rationale,
        }


class VoteFilterResult(NamedTuple):
    kept: list[str]
    kept_indices: list[int]
    zero_vote_indices: list[int]


@dataclass(frozen=True)
class EntailmentResult:
    label: str
    p_yes: Optional[float]


@dataclass
class IntroChainState:
    title: str = ""
    abstract: str = ""
    paragraphs: list[str] = field(default_factory=list)
    canonical_refs: list[Work] = field(default_factory=list)
    recent_refs: list[Work] = field(default_factory=list)
    votes: list[NoveltyVote] = field(default_factory=list)
    kept_paragraphs: list[str] = field(default_factory=list)
    summary: str = ""
    intro_text: str = ""
    citation_map: dict[int, str] = field(default_factory=dict)
    y_years: int = DEFAULT_Y_YEARS
    keep_fraction: float = DEFAULT_KEEP_FRACTION
    dropped_reference_ids: list[str] = field(default_factory=list)
    yearless_reference_ids: list[str] = field(default_factory=list)
    zero_vote_paragraphs: list[int] = field(default_factory=list)
    dangling_citations: list[int] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "title": self.title,
            "abstract": self.abstract,
            "paragraphs": self.paragraphs,
            "canonical_refs": [w.to_record() for w in self.canonical_refs],
            "recent_refs": [w.to_record() for w in self.recent_refs],
            "votes": [v.to_dict() for v in self.votes],
            "kept_paragraphs": self.kept_paragraphs,
            "summary": self.summary,
            "intro_text": self.intro_text,
            "citation_map": {str(k): v for k, v in sorted(self.citation_map.items())},
            "y_years": self.y_years,
            "keep_fraction": self.keep_fraction,
            "reports": {
                "dropped_reference_ids": self.dropped_reference_ids,
                "yearless_reference_ids": self.yearless_reference_ids,
                "zero_vote_paragraphs": self.zero_vote_paragraphs,
                "dangling_citations": self.dangling_citations,
            },
        }


# -- manuscript handling -----------------------------------------------------


def _strip_comments(text: str) -> str:
    lines = []
    for line in text.split("\n"):
        out = []
        i = 0
        while i < len(line):
            ch = line[i]
            if ch == "\\" and i + 1 < len(line):
                out.append(line[i : i + 2])
                i += 2
                continue
            if ch == "%":
                break
            out.append(ch)
            i += 1
        lines.append("".join(out))
    return "\n".join(lines)


def extract_paragraphs(manuscript: str, min_chars: int = MIN_PARAGRAPH_CHARS) -> list[str]:
    """Body paragraphs worth voting on: comments and float/equation blocks
    removed, split on blank lines, short stubs (headers etc.) dropped."""
    text = _strip_comments(manuscript)
    for env in _DROP_ENVS:
        pattern = re.compile(
            r"\\begin\{" + re.escape(env) + r"\}.*?\\end\{" + re.escape(env) + r"\}",
            re.DOTALL,
        )
        text = pattern.sub("", text)
    paragraphs = []
    for block in re.split(r"\n\s*\n", text):
        flat = " ".join(block.split())
        if len(flat) >= min_chars:
            paragraphs.append(flat)
    return paragraphs


def manuscript_title(manuscript: str) -> Optional[str]:
    m = _TITLE_CMD_RE.search(manuscript)
    return m.group(1).strip() if m else None


# -- reference handling -------------------------------------------------------


def split_references(refs: Sequence[Work], policy: RecencyPolicy) -> ReferenceSplit:
    """Partition year-bearing references into canonical and recent, preserving
    relative order; year-less references go to the side channel."""
    canonical: list[Work] = []
    recent: list[Work] = []
    yearless: list[Work] = []
    for ref in refs:
        if ref.year is None:
            yearless.append(ref)
        elif policy.is_canonical(ref.year):
            canonical.append(ref)
        else:
            recent.append(ref)
    return ReferenceSplit(canonical, recent, yearless)


# -- novelty voting ------------------------------------------------------------


def classify_novelty(
    paragraph: str,
    own_abstract: str,
    ref: Work,
    llm: TextGenerator,
    template: PromptTemplate,
    paragraph_index: int = 0,
) -> NoveltyVote:
    """Binary relevance-and-novelty judgment of one paragraph against one
    reference abstract. One re-ask on an unparseable verdict, then "no"."""
    if not ref.title or not ref.abstract:
        raise ValueError(f"reference {ref.id} lacks a title or abstract")
    prompt = template.render(
        {"abstract": own_abstract, "ref_abstract": ref.abstract, "paragraph": paragraph}
    )
    reminder = "\n\nAnswer YES or NO first."
    for attempt_prompt in (prompt, prompt + reminder):
        result = llm.generate(GenerationRequest(prompt=attempt_prompt))
        m = _YES_NO_RE.match(result.text)
        if m:
            rationale = result.text[m.end() :].strip().lstrip(",.:;!-— ").strip()
            return NoveltyVote(paragraph_index, ref.id, m.group(1).casefold(), rationale)
    return NoveltyVote(paragraph_index, ref.id, "no", "unparseable")


def vote_filter(
    paragraphs: Sequence[str],
    votes: Sequence[NoveltyVote],
    keep_fraction: float = DEFAULT_KEEP_FRACTION,
) -> VoteFilterResult:
    """Keep a paragraph iff its yes-share is at least keep_fraction; paragraphs
    that received no votes are excluded and reported."""
    if not 0.0 <= keep_fraction <= 1.0:
        raise ValueError("keep_fraction must be in [0, 1]")
    tallies: dict[int, list[int]] = {}
    for vote in votes:
        if not 0 <= vote.paragraph_index < len(paragraphs):
            raise ValueError(f"vote references unknown paragraph {vote.paragraph_index}")
        yes, total = tallies.get(vote.paragraph_index, (0, 0))
        tallies[vote.paragraph_index] = [yes + (vote.verdict == "yes"), total + 1]
    kept, kept_indices, zero = [], [], []
    for i, paragraph in enumerate(paragraphs):
        if i not in tallies:
            zero.append(i)
            continue
        yes, total = tallies[i]
        if yes / total >= keep_fraction:
            kept.append(paragraph)
            kept_indices.append(i)
    return VoteFilterResult(kept, kept_indices, zero)


def _nearest_refs(
    paragraph: str, refs: list[Work], cap: int, embedder: Optional[Embedder],
    ref_vectors: Optional[list[np.ndarray]],
) -> list[Work]:
    if len(refs) <= cap:
        return refs
    if embedder is None or ref_vectors is None:
        return refs[:cap]
    q = embedder.embed([paragraph])[0].astype(np.float64)
    qn = np.linalg.norm(q) or 1.0
    sims = []
    for i, vec in enumerate(ref_vectors):
        v = vec.astype(np.float64)
        vn = np.linalg.norm(v) or 1.0
        sims.append((-float(q @ v / (qn * vn)), i))
    sims.sort()
    chosen = sorted(i for _, i in sims[:cap])
    return [refs[i] for i in chosen]


def collect_votes(
    paragraphs: Sequence[str],
    own_abstract: str,
    refs: list[Work],
    llm: TextGenerator,
    template: PromptTemplate,
    max_refs_per_paragraph: int = DEFAULT_REFS_PER_PARAGRAPH,
    embedder: Optional[Embedder] = None,
    workers: int = 1,
) -> list[NoveltyVote]:
    """One vote per (paragraph, sampled reference) pair. With an embedder, the
    per-paragraph sample takes the nearest references; aggregation is sorted so
    concurrent execution cannot change the result."""
    ref_vectors = None
    if embedder is not None and len(refs) > max_refs_per_paragraph:
        ref_vectors = embedder.embed([r.embedding_text() for r in refs])
    tasks = []
    for i, paragraph in enumerate(paragraphs):
        for ref in _nearest_refs(paragraph, refs, max_refs_per_paragraph, embedder, ref_vectors):
            tasks.append((i, paragraph, ref))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            votes = list(
                pool.map(
                    lambda t: classify_novelty(t[1], own_abstract, t[2], llm, template, t[0]),
                    tasks,
                )
            )
    else:
        votes = [
            classify_novelty(paragraph, own_abstract, ref, llm, template, i)
            for i, paragraph, ref in tasks
        ]
    votes.sort(key=lambda v: (v.paragraph_index, v.reference_id))
    return votes


# -- summarization and composition ---------------------------------------------


def _render_summary_prompt(template: PromptTemplate, paragraphs: Sequence[str]) -> str:
    return template.render({"novel_results": [p.strip() for p in paragraphs]})


def summarize_results(
    kept_paragraphs: Sequence[str],
    llm: TextGenerator,
    template: PromptTemplate,
    prompt_budget_chars: Optional[int] = None,
) -> str:
    """Summarize the surviving paragraphs; over-budget inputs are batched and
    the batch summaries re-summarized."""
    if not kept_paragraphs:
        raise ChainError(
            "no paragraphs survived the novelty vote; lower keep_fraction and retry"
        )
    prompt = _render_summary_prompt(template, kept_paragraphs)
    if prompt_budget_chars is None or len(prompt) <= prompt_budget_chars:
        return llm.generate(GenerationRequest(prompt=prompt)).text
    if len(kept_paragraphs) == 1:
        # a single oversized paragraph: truncate rather than recurse forever
        overhead = len(_render_summary_prompt(template, [""]))
        clipped = kept_paragraphs[0][: max(prompt_budget_chars - overhead, 100)]
        prompt = _render_summary_prompt(template, [clipped])
        return llm.generate(GenerationRequest(prompt=prompt)).text

    batches: list[list[str]] = [[]]
    for paragraph in kept_paragraphs:
        trial = _render_summary_prompt(template, batches[-1] + [paragraph])
        if batches[-1] and len(trial) > prompt_budget_chars:
            batches.append([paragraph])
        else:
            batches[-1].append(paragraph)
    if len(batches) == 1:
        batches = [kept_paragraphs[: len(kept_paragraphs) // 2], kept_paragraphs[len(kept_paragraphs) // 2 :]]
    partials = [
        summarize_results(batch, llm, template, prompt_budget_chars) for batch in batches if batch
    ]
    return summarize_results(partials, llm, template, prompt_budget_chars)


class ComposeResult(NamedTuple):
    intro_text: str
    citation_map: dict[int, str]
    dangling: list[int]


def _strip_fences(text: str) -> str:
    first = text.find("'''")
    last = text.rfind("'''")
    if first >= 0 and last > first:
        return text[first + 3 : last].strip()
    return text.strip()


def compose_intro(
    title: str,
    summary: str,
    canonical_refs: Sequence[Work],
    recent_refs: Sequence[Work],
    llm: TextGenerator,
    template: PromptTemplate,
) -> ComposeResult:
    """Compose the introduction over numbered references.

    Fundamental references take numbers 1..C, recent ones C+1..C+R; bracket
    citations in the output resolve through that numbering. Out-of-range
    brackets stay in the text and are reported as dangling.
    """
    if not canonical_refs and not recent_refs:
        raise ValueError("at least one reference is required to compose an introduction")
    numbered = list(canonical_refs) + list(recent_refs)
    prompt = template.render(
        {
            "title": title,
            "results": summary,
            "fundamental_references": [
                {"number": i + 1, "title": w.title, "abstract": w.abstract or ""}
                for i, w in enumerate(canonical_refs)
            ],
            "recent_references": [
                {
                    "number": len(canonical_refs) + i + 1,
                    "title": w.title,
                    "abstract": w.abstract or "",
                }
                for i, w in enumerate(recent_refs)
            ],
        }
    )
    intro = _strip_fences(llm.generate(GenerationRequest(prompt=prompt)).text)
    citation_map: dict[int, str] = {}
    dangling: list[int] = []
    for raw in _BRACKET_RE.findall(intro):
        number = int(raw)
        if 1 <= number <= len(numbered):
            citation_map[number] = numbered[number - 1].id
        elif number not in dangling:
            dangling.append(number)
    return ComposeResult(intro, citation_map, dangling)


# -- claim extraction and entailment (shared with evaluation) -------------------


def extract_claims(
    intro_text: str,
    num_claims: int,
    llm: TextGenerator,
    template: PromptTemplate,
) -> list[str]:
    """Numbered novel claims stated by an introduction, at most num_claims."""
    if not intro_text:
        raise ValueError("intro_text must be non-empty")
    if not 3 <= num_claims <= 5:
        raise ValueError("num_claims must be within 3..5")
    prompt = template.render({"introduction": intro_text, "num_claims": num_claims})
    response = llm.generate(GenerationRequest(prompt=prompt)).text
    claims = []
    for line in response.splitlines():
        m = _CLAIM_LINE_RE.match(line)
        if m:
            claims.append(m.group(1))
    if not claims:
        raise ClaimExtractionError("response contained no numbered claim lines")
    return claims[:num_claims]


def entailment_probability(l_yes: float, l_no: float) -> float:
    """Normalize two continuation logprobs into P(yes), max-shifted for
    stability; P(yes) + P(no) is exactly 1."""
    m = max(l_yes, l_no)
    e_yes = math.exp(l_yes - m)
    e_no = math.exp(l_no - m)
    return e_yes / (e_yes + e_no)


def entailment_score(
    hypothesis: str,
    context: str,
    llm: TextGenerator,
    scorer: Optional[ContinuationScorer],
    template: PromptTemplate,
) -> EntailmentResult:
    """Yes/no entailment label plus the normalized yes-probability.

    The probability needs a scoring-capable backend; without one the label
    stands alone.
    """
    if not hypothesis or not context:
        raise ValueError("hypothesis and context must be non-empty")
    prompt = template.render({"hypothesis": hypothesis, "context": context})

    p_yes: Optional[float] = None
    if scorer is not None:
        try:
            scores = scorer.score_continuations(prompt, ["yes", "no"])
            by_text = {s.continuation: s.logprob for s in scores}
            p_yes = entailment_probability(by_text["yes"], by_text["no"])
        except CapabilityError:
            p_yes = None

    label = None
    reminder = '\n\nStart your answer with "yes" or "no".'
    for attempt_prompt in (prompt, prompt + reminder):
        result = llm.generate(GenerationRequest(prompt=attempt_prompt))
        m = _YES_NO_RE.match(result.text)
        if m:
            label = m.group(1).casefold()
            break
    if label is None:
        label = "yes" if (p_yes is not None and p_yes >= 0.5) else "no"
    return EntailmentResult(label=label, p_yes=p_yes)


# -- the full chain --------------------------------------------------------------


def run_intro_chain(
    manuscript: str,
    bib_refs: Sequence[Work],
    policy: RecencyPolicy,
    generator: TextGenerator,
    templates: Mapping[str, PromptTemplate],
    *,
    abstract: str,
    title: Optional[str] = None,
    keep_fraction: float = DEFAULT_KEEP_FRACTION,
    max_refs_per_paragraph: int = DEFAULT_REFS_PER_PARAGRAPH,
    embedder: Optional[Embedder] = None,
    prompt_budget_chars: Optional[int] = None,
    workers: int = 1,
) -> IntroChainState:
    """Run the whole chain, retaining every intermediate artifact.

    Stage failures raise ChainStageError carrying the stage name and the
    partial state accumulated so far.
    """
    state = IntroChainState(
        title=title or manuscript_title(manuscript) or "Untitled manuscript",
        abstract=abstract,
        y_years=policy.y_years,
        keep_fraction=keep_fraction,
    )
    if not abstract.strip():
        raise ChainStageError("inputs", "an abstract for the manuscript is required", state)

    usable = [r for r in bib_refs if r.title and r.abstract]
    state.dropped_reference_ids = [r.id for r in bib_refs if not (r.title and r.abstract)]
    if not usable:
        raise ChainStageError(
            "references", "no references resolved with both a title and an abstract", state
        )
    canonical, recent, yearless = split_references(usable, policy)
    state.canonical_refs = canonical
    state.recent_refs = recent
    state.yearless_reference_ids = [r.id for r in yearless]
    if not canonical and not recent:
        raise ChainStageError("references", "no references carry a publication year", state)

    state.paragraphs = extract_paragraphs(manuscript)
    if not state.paragraphs:
        raise ChainStageError("paragraphs", "manuscript yielded no usable paragraphs", state)

    try:
        state.votes = collect_votes(
            state.paragraphs,
            abstract,
            canonical + recent,
            generator,
            templates["intro_novelty"],
            max_refs_per_paragraph=max_refs_per_paragraph,
            embedder=embedder,
            workers=workers,
        )
    except Exception as exc:
        raise ChainStageError("novelty_votes", str(exc), state) from exc

    kept, _, zero = vote_filter(state.paragraphs, state.votes, keep_fraction)
    state.kept_paragraphs = kept
    state.zero_vote_paragraphs = zero

    try:
        state.summary = summarize_results(
            kept, generator, templates["intro_summarize"], prompt_budget_chars
        )
    except ChainError as exc:
        raise ChainStageError("summarize", str(exc), state) from exc

    try:
        composed = compose_intro(
            state.title, state.summary, canonical, recent, generator,
            templates["intro_compose"],
        )
    except Exception as exc:
        raise ChainStageError("compose", str(exc), state) from exc
    state.intro_text = composed.intro_text
    state.citation_map = composed.citation_map
    state.dangling_citations = composed.dangling
    return state
