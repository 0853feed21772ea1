"""Introduction-quality evaluation: unigram overlap against the human-written
original plus per-claim entailment probabilities."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from ..introgen.chain import entailment_score, extract_claims
from ..providers.templating import PromptTemplate
from .metrics import RougeScore, rouge1


@dataclass
class ClaimRecord:
    claim: str
    label: str
    p_yes: Optional[float]

    def to_dict(self) -> dict:
        return {"claim": self.claim, "label": self.label, "p_yes": self.p_yes}


@dataclass
class IntroPairResult:
    pair_index: int
    rouge: Optional[RougeScore]
    claims: list[ClaimRecord] = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "pair_index": self.pair_index,
            "rouge1": self.rouge.to_dict() if self.rouge else None,
            "claims": [c.to_dict() for c in self.claims],
            "error": self.error,
        }


@dataclass
class IntroEvalReport:
    pairs: list[IntroPairResult]
    num_claims_requested: int

    @property
    def claim_count(self) -> int:
        return sum(len(p.claims) for p in self.pairs)

    @property
    def entailed_count(self) -> int:
        return sum(1 for p in self.pairs for c in p.claims if c.label == "yes")

    def rouge_f1_values(self) -> list[float]:
        return [p.rouge.f1 for p in self.pairs if p.rouge is not None]

    def p_yes_values(self) -> list[float]:
        return [c.p_yes for p in self.pairs for c in p.claims if c.p_yes is not None]

    def to_json_dict(self) -> dict:
        rouge_values = self.rouge_f1_values()
        return {
            "num_claims_requested": self.num_claims_requested,
            "pair_count": len(self.pairs),
            "claim_count": self.claim_count,
            "entailed_count": self.entailed_count,
            "mean_rouge1_f1_x100": (
                100.0 * sum(rouge_values) / len(rouge_values) if rouge_values else None
            ),
            "pairs": [p.to_dict() for p in self.pairs],
        }


def run_intro_eval(
    pairs: Sequence[tuple[str, str]],
    generator,
    scorer,
    templates: Mapping[str, PromptTemplate],
    num_claims: int = 4,
) -> IntroEvalReport:
    """Evaluate (generated, original) introduction pairs.

    Per pair: ROUGE-1 of the generated text against the original, claim
    extraction from the generated text, and entailment of each claim against
    the original. Provider failures isolate to their pair.
    """
    if not pairs:
        raise ValueError("pairs must be non-empty")
    results: list[IntroPairResult] = []
    for i, (generated, original) in enumerate(pairs):
        score = rouge1(generated, original)
        record = IntroPairResult(pair_index=i, rouge=score)
        try:
            claims = extract_claims(generated, num_claims, generator, templates["eval_claims"])
            for claim in claims:
                verdict = entailment_score(
                    claim, original, generator, scorer, templates["eval_entailment"]
                )
                record.claims.append(
                    ClaimRecord(claim=claim, label=verdict.label, p_yes=verdict.p_yes)
                )
        except Exception as exc:
            record.error = f"{type(exc).__name__}: {exc}"
        results.append(record)
    return IntroEvalReport(pairs=results, num_claims_requested=num_claims)
