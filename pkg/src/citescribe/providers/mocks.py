"""Deterministic offline providers.

Every mock is a pure function of its inputs plus explicit script state, so a
fixed script and seed replay bit-identically. Nothing here touches a network.
"""

from __future__ import annotations

import json
import re
import threading
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .base import (
    CapabilityError,
    ContinuationScore,
    GenerationRequest,
    GenerationResult,
    TransportError,
    check_continuations,
)

UNSCRIPTED_PREFIX = "UNSCRIPTED-ECHO:"


class ScriptedGenerator:
    """Replays a (prompt-substring -> responses) table.

    Each script entry holds a list of responses consumed in order; once
    exhausted the last response repeats. Unscripted prompts get a
    deterministic echo marked with UNSCRIPTED_PREFIX.
    """

    def __init__(self, script: Sequence[tuple[str, Sequence[str] | str]] = ()):
        self._entries = [
            (pattern, [r] if isinstance(r, str) else list(r), [0])
            for pattern, r in script
        ]
        self._lock = threading.Lock()

    def generate(self, request: GenerationRequest) -> GenerationResult:
        with self._lock:
            for pattern, responses, cursor in self._entries:
                if pattern in request.prompt:
                    text = responses[min(cursor[0], len(responses) - 1)]
                    cursor[0] += 1
                    return GenerationResult(text=text, finish_reason="stop")
        tail = request.prompt.strip().splitlines()[-1] if request.prompt.strip() else ""
        return GenerationResult(
            text=f"{UNSCRIPTED_PREFIX} {tail[:80]}", finish_reason="mock_fallback"
        )


def _stable_logprob(text: str) -> float:
    # crc32-derived, always <= -1 so scripted favorites can sit above it
    return -1.0 - (zlib.crc32(text.encode("utf-8")) % 4000) / 1000.0


class ScriptedScorer:
    """Returns logprobs from a fixed table; unknown continuations get a stable
    crc32-derived value in [-5, -1]."""

    def __init__(self, table: dict[str, float] | None = None):
        self.table = dict(table or {})
        for continuation, logprob in self.table.items():
            if logprob > 0:
                raise ValueError(f"logprob for {continuation!r} must be <= 0")

    def score_continuations(self, prompt, continuations):
        check_continuations(continuations)
        return [
            ContinuationScore(c, self.table.get(c, _stable_logprob(c)))
            for c in continuations
        ]


_KEY_BLOCK_RE = re.compile(r"\{\s*\"key\":\s*\"([0-9a-f]{4})\".*?\}", re.DOTALL)


class ContentKeyScorer:
    """Scores candidate keys by the content of their JSON block in the prompt.

    A key whose block contains ``favored_substring`` (case-folded) scores
    ``favored_logprob``; every other key scores ``other_logprob``. This mirrors
    a model that reliably prefers one specific work, whatever random key it was
    dealt, which is exactly what planted-ground-truth tests need.
    """

    def __init__(
        self,
        favored_substring: str,
        favored_logprob: float = -0.05,
        other_logprob: float = -6.0,
    ):
        self.favored_substring = favored_substring.casefold()
        self.favored_logprob = favored_logprob
        self.other_logprob = other_logprob

    def score_continuations(self, prompt, continuations):
        check_continuations(continuations)
        blocks = {m.group(1): m.group(0).casefold() for m in _KEY_BLOCK_RE.finditer(prompt)}
        scores = []
        for c in continuations:
            block = blocks.get(c, "")
            favored = self.favored_substring in block
            scores.append(
                ContinuationScore(c, self.favored_logprob if favored else self.other_logprob)
            )
        return scores


class HashEmbedder:
    """Feature-hashed character-trigram embedder, L2-normalized.

    Deterministic for a fixed (dimension, seed); near-identical strings land
    near each other in cosine space, which is all the offline tests require.
    """

    def __init__(self, dimension: int = 64, seed: int = 0):
        if dimension < 2:
            raise ValueError("dimension must be >= 2")
        self.dimension = dimension
        self.seed = seed
        self._salt = str(seed).encode("utf-8")

    def _embed_one(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        padded = f" {text.casefold()} "
        for i in range(len(padded) - 2):
            gram = padded[i : i + 3].encode("utf-8")
            h = zlib.crc32(self._salt + gram)
            sign = 1.0 if (h >> 16) & 1 else -1.0
            vec[h % self.dimension] += sign
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            vec[0] = 1.0
            return vec.astype(np.float32)
        return (vec / norm).astype(np.float32)

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        if not texts:
            raise ValueError("texts must be non-empty")
        return [self._embed_one(t) for t in texts]


class ScorelessGenerator(ScriptedGenerator):
    """Generator-only backend: scoring raises CapabilityError so callers can
    exercise the pairwise fallback path."""

    def score_continuations(self, prompt, continuations):
        raise CapabilityError("backend cannot return continuation logprobs")


@dataclass
class FlakyGenerator:
    """Fault-injection wrapper: raises TransportError for the first
    ``failures`` calls, then delegates."""

    inner: ScriptedGenerator
    failures: int
    calls: int = field(default=0)

    def generate(self, request: GenerationRequest) -> GenerationResult:
        self.calls += 1
        if self.calls <= self.failures:
            raise TransportError(f"injected transport failure #{self.calls}")
        return self.inner.generate(request)


def fabrication_response(title: str, abstract: str) -> str:
    """Convenience for scripting the fabrication step."""
    return json.dumps({"title": title, "abstract": abstract})
