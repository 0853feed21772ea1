"""Retrieval evaluation: ground-truth-plus-distractors trials.

Each case buries a known citation among distractors drawn by one of three
strategies of increasing difficulty (random pool, embedding neighbors of the
ground truth, references of the source paper). Any ranker that orders
candidate works can be measured; rows aggregate mean reciprocal rank and
precision-at-k per (strategy, n).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

from ..corpus.works import Work
from ..providers.templating import PromptTemplate
from ..recommend.context import CITE_TOKEN, ContextWindow
from ..recommend.pipeline import Candidate, assign_keys, pairwise_rank, score_candidates
from ..vectorindex.index import VectorIndex, query_knn
from .metrics import mrr, precision_at_k

STRATEGIES = ("random", "nearest_neighbors", "references")
DEFAULT_NS = (3, 5, 10)
CITE_MARKER = "[CITE]"


class CaseSkipped(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class CaseSeed:
    """One ground-truth trial before distractors are attached."""

    case_id: str
    context: ContextWindow
    ground_truth_id: str
    source_paper_id: str
    source_reference_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class EvalCase:
    seed: CaseSeed
    strategy: str
    n: int
    distractor_ids: tuple[str, ...]

    def __post_init__(self):
        if self.seed.ground_truth_id in self.distractor_ids:
            raise ValueError("ground truth may not appear among distractors")
        if len(set(self.distractor_ids)) != len(self.distractor_ids):
            raise ValueError("distractor ids must be distinct")
        if len(self.distractor_ids) != self.n - 1:
            raise ValueError("need exactly n-1 distractors")


@dataclass(frozen=True)
class RankingTask:
    """What a ranker sees: the slot context and the shuffled candidate works.

    ground_truth_id is carried for the oracle rankers only; honest rankers
    must not read it.
    """

    context: ContextWindow
    candidates: tuple[Work, ...]
    ground_truth_id: str


Ranker = Callable[[RankingTask, random.Random], list[str]]


@dataclass
class RetrievalMetrics:
    strategy: str
    n: int
    mrr: float
    p_at_k: dict[int, float]
    case_count: int
    skipped: int = 0
    failed: int = 0
    skip_reasons: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "strategy": self.strategy,
            "n": self.n,
            "mrr": self.mrr,
            "p_at_k": {str(k): v for k, v in sorted(self.p_at_k.items())},
            "case_count": self.case_count,
            "skipped": self.skipped,
            "failed": self.failed,
            "skip_reasons": dict(sorted(self.skip_reasons.items())),
        }


@dataclass
class RetrievalReport:
    rows: list[RetrievalMetrics]
    ranker_name: str
    seed: int

    def to_json_dict(self) -> dict:
        return {
            "ranker": self.ranker_name,
            "seed": self.seed,
            "rows": [row.to_dict() for row in self.rows],
        }


# -- building cases ------------------------------------------------------------


def _sentence_context(sentences: Sequence[dict], index: int) -> ContextWindow:
    text = str(sentences[index]["text"])
    if CITE_MARKER in text:
        head, _, tail = text.partition(CITE_MARKER)
        left = head.rstrip()
        right = tail.lstrip()
        masked = f"{left}{' ' if left else ''}{CITE_TOKEN}{' ' if right else ''}{right}"
    else:
        masked = f"{text.rstrip()} {CITE_TOKEN}"
    previous = str(sentences[index - 1]["text"]) if index > 0 else None
    nxt = str(sentences[index + 1]["text"]) if index + 1 < len(sentences) else None
    return ContextWindow(previous, masked, nxt)


def build_eval_set(
    papers: Sequence[dict],
    corpus_ids: set[str],
    per_paper: int = 5,
    min_sentences: int = 10,
    rng: Optional[random.Random] = None,
) -> tuple[list[CaseSeed], dict]:
    """Sample citation-bearing sentences from qualifying papers.

    A sentence qualifies when its cited work resolves in the corpus; papers
    with fewer than min_sentences qualifying sentences are excluded (counted).
    """
    rng = rng or random.Random(0)
    seeds: list[CaseSeed] = []
    excluded = 0
    for paper in papers:
        sentences = paper.get("sentences", [])
        qualifying = [
            i
            for i, s in enumerate(sentences)
            if s.get("citation_id") and s["citation_id"] in corpus_ids
        ]
        if len(qualifying) < min_sentences:
            excluded += 1
            continue
        chosen = sorted(rng.sample(qualifying, per_paper))
        for i in chosen:
            seeds.append(
                CaseSeed(
                    case_id=f"{paper['id']}#{i}",
                    context=_sentence_context(sentences, i),
                    ground_truth_id=str(sentences[i]["citation_id"]),
                    source_paper_id=str(paper["id"]),
                    source_reference_ids=tuple(
                        str(r) for r in paper.get("reference_ids", [])
                    ),
                )
            )
    report = {"papers_seen": len(papers), "papers_excluded": excluded, "cases": len(seeds)}
    return seeds, report


# -- distractors ----------------------------------------------------------------


def _nearest_ids(
    index: VectorIndex, work_id: str, how_many: int, exclude: set[str]
) -> list[str]:
    try:
        row = index.ids.index(work_id)
    except ValueError:
        raise CaseSkipped("ground_truth_not_indexed")
    # ask for extra neighbors to survive the exclusions
    neighbors = query_knn(index, index.matrix[row], how_many + len(exclude) + 1)
    out = []
    for nb in neighbors:
        if nb.work_id in exclude:
            continue
        out.append(nb.work_id)
        if len(out) == how_many:
            break
    return out


def make_distractors(
    case: CaseSeed,
    strategy: str,
    n: int,
    pool_ids: Sequence[str],
    index: Optional[VectorIndex],
    rng: random.Random,
    backfill: bool = False,
) -> list[str]:
    """n-1 distractor ids for a case; never includes the ground truth.

    The references strategy skips thin cases unless backfill is set, in which
    case embedding neighbors fill the remainder.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if n < 2:
        raise ValueError("n must be >= 2")
    gt = case.ground_truth_id
    needed = n - 1

    if strategy == "random":
        pool = [p for p in pool_ids if p != gt]
        if len(pool) < needed:
            raise CaseSkipped("random_pool_too_small")
        return rng.sample(pool, needed)

    if strategy == "nearest_neighbors":
        if index is None:
            raise ValueError("nearest_neighbors strategy requires an index")
        out = _nearest_ids(index, gt, needed, {gt})
        if len(out) < needed:
            raise CaseSkipped("not_enough_neighbors")
        return out

    refs = [r for r in dict.fromkeys(case.source_reference_ids) if r != gt]
    if len(refs) >= needed:
        return rng.sample(refs, needed)
    if not backfill:
        raise CaseSkipped("too_few_references")
    if index is None:
        raise ValueError("backfill requires an index")
    chosen = list(refs)
    extra = _nearest_ids(index, gt, needed - len(chosen), {gt, *chosen})
    chosen.extend(extra)
    if len(chosen) < needed:
        raise CaseSkipped("backfill_exhausted")
    return chosen


# -- rankers ---------------------------------------------------------------------


def oracle_ranker(task: RankingTask, rng: random.Random) -> list[str]:
    ids = [w.id for w in task.candidates]
    ids.remove(task.ground_truth_id)
    return [task.ground_truth_id, *ids]


def anti_oracle_ranker(task: RankingTask, rng: random.Random) -> list[str]:
    ids = [w.id for w in task.candidates]
    ids.remove(task.ground_truth_id)
    return [*ids, task.ground_truth_id]


def random_ranker(task: RankingTask, rng: random.Random) -> list[str]:
    ids = [w.id for w in task.candidates]
    rng.shuffle(ids)
    return ids


def make_score_ranker(
    scorer, templates: Mapping[str, PromptTemplate]
) -> Ranker:
    """Rank through the production key-scoring path."""

    def ranker(task: RankingTask, rng: random.Random) -> list[str]:
        keys = assign_keys(len(task.candidates), rng)
        candidates = [
            Candidate(work=w, key=key, source="index", retrieval_distance=None)
            for w, key in zip(task.candidates, keys)
        ]
        scored = score_candidates(task.context, candidates, scorer, templates["cite_score"])
        return [s.candidate.work.id for s in scored]

    return ranker


def make_pairwise_ranker(
    generator, templates: Mapping[str, PromptTemplate]
) -> Ranker:
    def ranker(task: RankingTask, rng: random.Random) -> list[str]:
        keys = assign_keys(len(task.candidates), rng)
        candidates = [
            Candidate(work=w, key=key, source="index", retrieval_distance=None)
            for w, key in zip(task.candidates, keys)
        ]
        ranked = pairwise_rank(task.context, candidates, generator, templates["cite_score"])
        return [s.candidate.work.id for s in ranked]

    return ranker


BUILTIN_RANKERS: dict[str, Ranker] = {
    "oracle": oracle_ranker,
    "anti_oracle": anti_oracle_ranker,
    "random": random_ranker,
}


# -- the runner -------------------------------------------------------------------


def _case_rng(seed: int, strategy: str, n: int, case_id: str) -> random.Random:
    return random.Random(f"{seed}:{strategy}:{n}:{case_id}")


def run_retrieval_eval(
    seeds: Sequence[CaseSeed],
    ranker: Ranker,
    works_by_id: Mapping[str, Work],
    strategies: Sequence[str] = STRATEGIES,
    ns: Sequence[int] = DEFAULT_NS,
    *,
    index: Optional[VectorIndex] = None,
    pool_ids: Optional[Sequence[str]] = None,
    seed: int = 0,
    backfill: bool = False,
    ranker_name: str = "custom",
) -> RetrievalReport:
    """One metrics row per (strategy, n).

    Candidates are shuffled with a per-case rng derived from the run seed
    before presentation; ranker failures drop the case from the means and are
    counted. Aggregation iterates cases sorted by id, so results do not depend
    on input order.
    """
    pool = list(pool_ids) if pool_ids is not None else sorted(works_by_id)
    ordered_seeds = sorted(seeds, key=lambda s: s.case_id)
    rows: list[RetrievalMetrics] = []
    for strategy in strategies:
        for n in ns:
            ranks: list[int] = []
            skipped: dict[str, int] = {}
            failed = 0
            for case in ordered_seeds:
                rng = _case_rng(seed, strategy, n, case.case_id)
                try:
                    distractors = make_distractors(
                        case, strategy, n, pool, index, rng, backfill=backfill
                    )
                except CaseSkipped as skip:
                    skipped[skip.reason] = skipped.get(skip.reason, 0) + 1
                    continue
                candidate_ids = [case.ground_truth_id, *distractors]
                rng.shuffle(candidate_ids)
                task = RankingTask(
                    context=case.context,
                    candidates=tuple(works_by_id[cid] for cid in candidate_ids),
                    ground_truth_id=case.ground_truth_id,
                )
                try:
                    ordering = ranker(task, rng)
                    rank = ordering.index(case.ground_truth_id) + 1
                except Exception:
                    failed += 1
                    continue
                ranks.append(rank)
            p_at_k = {k: precision_at_k(ranks, k) for k in (1, 3, 5) if k < n and ranks}
            rows.append(
                RetrievalMetrics(
                    strategy=strategy,
                    n=n,
                    mrr=mrr(ranks) if ranks else 0.0,
                    p_at_k=p_at_k,
                    case_count=len(ranks),
                    skipped=sum(skipped.values()),
                    failed=failed,
                    skip_reasons=skipped,
                )
            )
    return RetrievalReport(rows=rows, ranker_name=ranker_name, seed=seed)
