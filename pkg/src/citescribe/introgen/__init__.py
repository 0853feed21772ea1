from .chain import (
    ChainError,
    ChainStageError,
    ClaimExtractionError,
    ComposeResult,
    EntailmentResult,
    IntroChainState,
    NoveltyVote,
    RecencyPolicy,
    ReferenceSplit,
    VoteFilterResult,
    classify_novelty,
    collect_votes,
    compose_intro,
    entailment_probability,
    entailment_score,
    extract_claims,
    extract_paragraphs,
    manuscript_title,
    run_intro_chain,
    split_references,
    summarize_results,
    vote_filter,
)

__all__ = [
    "ChainError",
    "ChainStageError",
    "ClaimExtractionError",
    "ComposeResult",
    "EntailmentResult",
    "IntroChainState",
    "NoveltyVote",
    "RecencyPolicy",
    "ReferenceSplit",
    "VoteFilterResult",
    "classify_novelty",
    "collect_votes",
    "compose_intro",
    "entailment_probability",
    "entailment_score",
    "extract_claims",
    "extract_paragraphs",
    "manuscript_title",
    "run_intro_chain",
    "split_references",
    "summarize_results",
    "vote_filter",
]
