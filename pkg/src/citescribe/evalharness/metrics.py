"""Ranking and text-overlap metrics."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Sequence


class MetricUndefinedError(ValueError):
    """Raised when a metric is requested over an empty case list."""


def mrr(ranks: Sequence[int]) -> float:
    """Mean reciprocal rank of the ground truth over cases."""
    if not ranks:
        raise MetricUndefinedError("mrr is undefined for an empty rank list")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be positive integers")
    return sum(1.0 / r for r in ranks) / len(ranks)


def precision_at_k(ranks: Sequence[int], k: int) -> float:
    """Fraction of cases whose ground truth landed within the top k."""
    if not ranks:
        raise MetricUndefinedError("precision_at_k is undefined for an empty rank list")
    if k < 1:
        raise ValueError("k must be >= 1")
    if any(r < 1 for r in ranks):
        raise ValueError("ranks must be positive integers")
    return sum(1 for r in ranks if r <= k) / len(ranks)


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f1: float

    def to_dict(self) -> dict:
        return {"recall": self.recall, "precision": self.precision, "f1": self.f1}


_TOKEN_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def rouge1(candidate: str, reference: str) -> RougeScore:
    """Unigram overlap with count clipping; empty reference scores all zeros."""
    cand = Counter(_tokens(candidate))
    ref = Counter(_tokens(reference))
    if not ref:
        return RougeScore(0.0, 0.0, 0.0)
    overlap = sum(min(count, ref[token]) for token, count in cand.items())
    recall = overlap / sum(ref.values())
    precision = overlap / sum(cand.values()) if cand else 0.0
    if recall + precision == 0.0:
        return RougeScore(0.0, 0.0, 0.0)
    f1 = 2.0 * recall * precision / (recall + precision)
    return RougeScore(recall, precision, f1)
