"""Fabricate-then-retrieve citation suggestion.

The slot context prompts the model to invent a plausible paper; the invention
is embedded and used purely as a retrieval query against the index (it never
reaches the caller). Real candidates from the index and the author's own
bibliography are keyed with short random hex strings and re-ranked by the
model's log probability of emitting each key.
"""

from __future__ import annotations

import json
import random
import re
import time
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from ..corpus.bibtex import bib_to_work, parse_bibtex
from ..corpus.works import Work
from ..providers.base import (
    CapabilityError,
    ContinuationScorer,
    Embedder,
    GenerationRequest,
    ProviderError,
    TextGenerator,
)
from ..providers.templating import PromptTemplate
from ..vectorindex.index import VectorIndex, query_knn
from .context import ContextWindow, make_context

KEY_SPACE = 65536
KEY_RE = re.compile(r"^[0-9a-f]{4}$")

FABRICATE_REMINDER = (
    '\n\nReminder: respond with a single JSON object containing exactly the keys '
    '"title" and "abstract", both non-empty strings.'
)


class FabricationError(ProviderError):
    """The model never produced a parseable fabricated work."""


class KeyCapacityError(ValueError):
    pass


@dataclass
class SuggestStageError(Exception):
    stage: str
    cause: Exception

    def __str__(self):
        return f"stage {self.stage!r} failed: {self.cause}"


@dataclass
class PairwiseTournamentError(Exception):
    completed_pairs: list[tuple[str, str, str]]  # (key_a, key_b, winner_key)
    cause: Optional[Exception] = None

    def __str__(self):
        return (
            f"pairwise tournament aborted after {len(self.completed_pairs)} comparisons"
            + (f": {self.cause}" if self.cause else "")
        )


@dataclass(frozen=True)
class FabricatedWork:
    title: str
    abstract: str


@dataclass(frozen=True)
class Candidate:
    work: Work
    key: str
    source: str  # "bibtex" | "index"
    retrieval_distance: Optional[float] = None

    def __post_init__(self):
        if not KEY_RE.match(self.key):
            raise ValueError(f"candidate key {self.key!r} is not 4 lowercase hex chars")
        if self.source not in ("bibtex", "index"):
            raise ValueError(f"unknown candidate source {self.source!r}")


@dataclass(frozen=True)
class ScoredCandidate:
    candidate: Candidate
    score: float
    rank: int


@dataclass(frozen=True)
class SuggestConfig:
    k: int = 10
    max_suggestions: int = 10
    candidate_cap: int = 20
    seed: int = 0
    ranker: str = "score"  # "score" | "pairwise"


@dataclass
class SuggestionBatch:
    context: ContextWindow
    suggestions: list[ScoredCandidate]
    timings_ms: dict[str, float] = field(default_factory=dict)
    fabrication_failed: bool = False

    def to_json_dict(self) -> dict:
        return {
            "context": self.context.to_dict(),
            "suggestions": [
                {
                    "rank": s.rank,
                    "key": s.candidate.key,
                    "work_id": s.candidate.work.id,
                    "title": s.candidate.work.title,
                    "year": s.candidate.work.year,
                    "venue": s.candidate.work.venue,
                    "source": s.candidate.source,
                    "score": s.score,
                }
                for s in self.suggestions
            ],
        }


def serialize_batch(batch: SuggestionBatch) -> str:
    return json.dumps(batch.to_json_dict(), sort_keys=True, ensure_ascii=False)


def assign_keys(n: int, rng: random.Random) -> list[str]:
    """n distinct 4-char lowercase hex keys, sampled without replacement."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n > KEY_SPACE:
        raise KeyCapacityError(f"cannot issue {n} keys from a space of {KEY_SPACE}")
    return [f"{value:04x}" for value in rng.sample(range(KEY_SPACE), n)]


def _extract_json_object(text: str) -> Optional[dict]:
    """First balanced {...} region that parses as a JSON object."""
    start = text.find("{")
    while start >= 0:
        depth = 0
        in_string = False
        escaped = False
        for i in range(start, len(text)):
            ch = text[i]
            if in_string:
                if escaped:
                    escaped = False
                elif ch == "\\":
                    escaped = True
                elif ch == '"':
                    in_string = False
                continue
            if ch == '"':
                in_string = True
            elif ch == "{":
                depth += 1
            elif ch == "}":
                depth -= 1
                if depth == 0:
                    try:
                        obj = json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        break
                    if isinstance(obj, dict):
                        return obj
                    break
        start = text.find("{", start + 1)
    return None


def fabricate_citation(
    ctx: ContextWindow,
    llm: TextGenerator,
    template: PromptTemplate,
) -> FabricatedWork:
    """Ask the model to invent a plausible citation for the slot.

    One re-ask with a format reminder; a second unparseable response raises
    FabricationError so the caller can fall back to the raw sentence query.
    """
    prompt = template.render(
        {
            "previous_sentence": ctx.previous_sentence,
            "masked_sentence": ctx.masked_sentence,
            "next_sentence": ctx.next_sentence,
        }
    )
    for attempt_prompt in (prompt, prompt + FABRICATE_REMINDER):
        result = llm.generate(GenerationRequest(prompt=attempt_prompt))
        obj = _extract_json_object(result.text)
        if obj is not None:
            title = obj.get("title")
            abstract = obj.get("abstract")
            if isinstance(title, str) and title and isinstance(abstract, str) and abstract:
                return FabricatedWork(title=title, abstract=abstract)
    raise FabricationError("model did not return a parseable title/abstract object")


def _norm_title(title: str) -> str:
    return " ".join(title.casefold().split())


def retrieve_candidates(
    fab: Optional[FabricatedWork],
    index: VectorIndex,
    works_by_id: Mapping[str, Work],
    bib_works: Sequence[Work],
    embedder: Embedder,
    k: int = 10,
    rng: Optional[random.Random] = None,
    candidate_cap: int = 20,
    query_text: Optional[str] = None,
) -> list[Candidate]:
    """Index neighbors of the fabricated work plus the author's bibliography.

    Bibliography entries win title collisions (case-folded, whitespace
    collapsed) because the user already curated them. Keys are assigned to the
    final union, bibliography first.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if query_text is None:
        if fab is None:
            raise ValueError("either a fabricated work or query_text is required")
        query_text = f"{fab.title} {fab.abstract}"

    neighbors = []
    if index.count > 0:
        vector = embedder.embed([query_text])[0]
        neighbors = query_knn(index, vector, k)

    bib_titles = {_norm_title(w.title) for w in bib_works}
    picked: list[tuple[Work, str, Optional[float]]] = [
        (w, "bibtex", None) for w in bib_works
    ]
    for nb in neighbors:
        work = works_by_id.get(nb.work_id)
        if work is None:
            raise LookupError(f"index returned unknown work id {nb.work_id!r}")
        if _norm_title(work.title) in bib_titles:
            continue
        picked.append((work, "index", nb.distance))
    picked = picked[:candidate_cap]

    keys = assign_keys(len(picked), rng or random.Random(0))
    return [
        Candidate(work=w, key=key, source=source, retrieval_distance=distance)
        for (w, source, distance), key in zip(picked, keys)
    ]


def _candidate_vars(ctx: ContextWindow, candidates: Sequence[Candidate]) -> dict:
    ordered = sorted(candidates, key=lambda c: c.key)
    return {
        "previous_sentence": ctx.previous_sentence,
        "masked_sentence": ctx.masked_sentence,
        "next_sentence": ctx.next_sentence,
        "citations": [
            {
                "key": c.key,
                "title_json": json.dumps(c.work.title, ensure_ascii=False),
                "abstract_json": json.dumps(c.work.abstract or "", ensure_ascii=False),
            }
            for c in ordered
        ],
    }


def _check_batch(candidates: Sequence[Candidate]) -> None:
    if not candidates:
        raise ValueError("candidate batch must be non-empty")
    keys = [c.key for c in candidates]
    if len(set(keys)) != len(keys):
        raise ValueError("candidate keys must be unique within a batch")


def _tie_key(candidate: Candidate) -> tuple[float, str]:
    distance = candidate.retrieval_distance
    return (distance if distance is not None else float("inf"), candidate.key)


def score_candidates(
    ctx: ContextWindow,
    candidates: Sequence[Candidate],
    llm: ContinuationScorer,
    template: PromptTemplate,
) -> list[ScoredCandidate]:
    """One scoring inference pass: rank keys by their continuation logprob.

    Candidates serialize into the prompt in ascending key order so the prompt
    bytes are deterministic for a batch regardless of arrival order.
    """
    _check_batch(candidates)
    prompt = template.render(_candidate_vars(ctx, candidates))
    try:
        scores = llm.score_continuations(prompt, [c.key for c in candidates])
    except CapabilityError as exc:
        raise CapabilityError(
            f"{exc}; use pairwise_rank for backends without continuation scoring"
        ) from exc
    by_key = {s.continuation: s.logprob for s in scores}
    ranked = sorted(candidates, key=lambda c: (-by_key[c.key], *_tie_key(c)))
    return [
        ScoredCandidate(candidate=c, score=by_key[c.key], rank=i + 1)
        for i, c in enumerate(ranked)
    ]


def pairwise_rank(
    ctx: ContextWindow,
    candidates: Sequence[Candidate],
    llm: TextGenerator,
    template: PromptTemplate,
    max_candidates: int = 12,
) -> list[ScoredCandidate]:
    """Round-robin tournament ranker for scoreless backends.

    Every unordered pair is presented once, in canonical ascending-key order;
    win counts decide the total order (standard tie-break). Quadratic in the
    batch size, hence the cost guard.
    """
    _check_batch(candidates)
    if len(candidates) < 2:
        raise ValueError("pairwise ranking needs at least 2 candidates")
    if len(candidates) > max_candidates:
        raise ValueError(
            f"pairwise ranking capped at {max_candidates} candidates, got {len(candidates)}"
        )
    ordered = sorted(candidates, key=lambda c: c.key)
    wins = {c.key: 0 for c in ordered}
    completed: list[tuple[str, str, str]] = []
    for i in range(len(ordered)):
        for j in range(i + 1, len(ordered)):
            a, b = ordered[i], ordered[j]
            prompt = template.render(_candidate_vars(ctx, [a, b]))
            try:
                result = llm.generate(GenerationRequest(prompt=prompt))
            except ProviderError as exc:
                raise PairwiseTournamentError(completed, exc) from exc
            text = result.text.casefold()
            pos_a, pos_b = text.find(a.key), text.find(b.key)
            if pos_a < 0 and pos_b < 0:
                raise PairwiseTournamentError(
                    completed,
                    ProviderError(f"response named neither key {a.key!r} nor {b.key!r}"),
                )
            if pos_b < 0 or (pos_a >= 0 and pos_a <= pos_b):
                winner = a.key
            else:
                winner = b.key
            wins[winner] += 1
            completed.append((a.key, b.key, winner))
    ranked = sorted(candidates, key=lambda c: (-wins[c.key], *_tie_key(c)))
    return [
        ScoredCandidate(candidate=c, score=float(wins[c.key]), rank=i + 1)
        for i, c in enumerate(ranked)
    ]


def suggest(
    document: str,
    cursor: int,
    bibtex_text: str,
    index: VectorIndex,
    works_by_id: Mapping[str, Work],
    generator: TextGenerator,
    scorer: ContinuationScorer,
    embedder: Embedder,
    templates: Mapping[str, PromptTemplate],
    config: SuggestConfig = SuggestConfig(),
) -> SuggestionBatch:
    """End-to-end suggestion: context, fabrication (with fallback), retrieval,
    scoring. Deterministic under scripted mocks and a fixed seed."""
    timings: dict[str, float] = {}
    ctx = make_context(document, cursor)
    rng = random.Random(config.seed)

    fab: Optional[FabricatedWork] = None
    fallback_text: Optional[str] = None
    start = time.monotonic()
    try:
        fab = fabricate_citation(ctx, generator, templates["cite_fabricate"])
    except FabricationError:
        fallback_text = ctx.query_fallback_text()
    except ProviderError as exc:
        raise SuggestStageError("fabricate", exc) from exc
    timings["fabricate"] = (time.monotonic() - start) * 1000.0

    bib_works = [
        work
        for entry in parse_bibtex(bibtex_text).entries
        if (work := bib_to_work(entry)) is not None
    ]

    start = time.monotonic()
    try:
        candidates = retrieve_candidates(
            fab,
            index,
            works_by_id,
            bib_works,
            embedder,
            k=config.k,
            rng=rng,
            candidate_cap=config.candidate_cap,
            query_text=fallback_text,
        )
    except ProviderError as exc:
        raise SuggestStageError("retrieve", exc) from exc
    timings["retrieve"] = (time.monotonic() - start) * 1000.0

    start = time.monotonic()
    if not candidates:
        ranked: list[ScoredCandidate] = []
    else:
        try:
            if config.ranker == "pairwise" and len(candidates) >= 2:
                # tournament cost guard: keep the strongest-retrieved slice
                ranked = pairwise_rank(
                    ctx, candidates[:12], generator, templates["cite_score"]
                )
            else:
                ranked = score_candidates(ctx, candidates, scorer, templates["cite_score"])
        except (ProviderError, PairwiseTournamentError) as exc:
            raise SuggestStageError("score", exc) from exc
    timings["score"] = (time.monotonic() - start) * 1000.0

    return SuggestionBatch(
        context=ctx,
        suggestions=ranked[: config.max_suggestions],
        timings_ms=timings,
        fabrication_failed=fallback_text is not None,
    )
