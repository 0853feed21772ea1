from .introeval import ClaimRecord, IntroEvalReport, IntroPairResult, run_intro_eval
from .metrics import MetricUndefinedError, RougeScore, mrr, precision_at_k, rouge1
from .reporting import (
    format_intro_table,
    format_retrieval_table,
    write_intro_report,
    write_retrieval_report,
)
from .retrieval import (
    BUILTIN_RANKERS,
    DEFAULT_NS,
    STRATEGIES,
    CaseSeed,
    CaseSkipped,
    EvalCase,
    RankingTask,
    RetrievalMetrics,
    RetrievalReport,
    anti_oracle_ranker,
    build_eval_set,
    make_distractors,
    make_pairwise_ranker,
    make_score_ranker,
    oracle_ranker,
    random_ranker,
    run_retrieval_eval,
)

__all__ = [
    "BUILTIN_RANKERS",
    "CaseSeed",
    "CaseSkipped",
    "ClaimRecord",
    "DEFAULT_NS",
    "EvalCase",
    "IntroEvalReport",
    "IntroPairResult",
    "MetricUndefinedError",
    "RankingTask",
    "RetrievalMetrics",
    "RetrievalReport",
    "RougeScore",
    "STRATEGIES",
    "anti_oracle_ranker",
    "build_eval_set",
    "format_intro_table",
    "format_retrieval_table",
    "make_distractors",
    "make_pairwise_ranker",
    "make_score_ranker",
    "mrr",
    "oracle_ranker",
    "precision_at_k",
    "random_ranker",
    "rouge1",
    "run_intro_eval",
    "run_retrieval_eval",
    "write_intro_report",
    "write_retrieval_report",
]
