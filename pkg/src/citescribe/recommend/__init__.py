from .context import CITE_TOKEN, ContextWindow, make_context, split_sentences
from .pipeline import (
    Candidate,
    FabricatedWork,
    FabricationError,
    KeyCapacityError,
    PairwiseTournamentError,
    ScoredCandidate,
    SuggestConfig,
    SuggestStageError,
    SuggestionBatch,
    assign_keys,
    fabricate_citation,
    pairwise_rank,
    retrieve_candidates,
    score_candidates,
    serialize_batch,
    suggest,
)

__all__ = [
    "CITE_TOKEN",
    "Candidate",
    "ContextWindow",
    "FabricatedWork",
    "FabricationError",
    "KeyCapacityError",
    "PairwiseTournamentError",
    "ScoredCandidate",
    "SuggestConfig",
    "SuggestStageError",
    "SuggestionBatch",
    "assign_keys",
    "fabricate_citation",
    "make_context",
    "pairwise_rank",
    "retrieve_candidates",
    "score_candidates",
    "serialize_batch",
    "split_sentences",
    "suggest",
]
