"""Provider-facing contracts: text generation, continuation scoring, embedding.

Real model servers and the deterministic mocks implement the same three
callables, so every pipeline stage can run offline.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence, runtime_checkable

import numpy as np

RETRY_ATTEMPTS = 3
RETRY_BASE_DELAY = 0.25


class ProviderError(Exception):
    """Base class for provider failures."""


class TransportError(ProviderError):
    """Retryable failure: network trouble or a 5xx-class server response."""


class ProviderRejection(ProviderError):
    """Terminal failure: the provider refused the request."""


class CapabilityError(ProviderError):
    """The backend does not support the requested operation."""


class EmbeddingDimensionError(ProviderError):
    """Embedding output does not match the configured dimension."""


@dataclass(frozen=True)
class GenerationRequest:
    prompt: str
    max_tokens: int = 512
    temperature: float = 0.0
    stop: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")


@dataclass(frozen=True)
class GenerationResult:
    text: str
    finish_reason: str = "stop"


@dataclass(frozen=True)
class ContinuationScore:
    continuation: str
    logprob: float


@runtime_checkable
class TextGenerator(Protocol):
    def generate(self, request: GenerationRequest) -> GenerationResult: ...


@runtime_checkable
class ContinuationScorer(Protocol):
    def score_continuations(
        self, prompt: str, continuations: Sequence[str]
    ) -> list[ContinuationScore]: ...


@runtime_checkable
class Embedder(Protocol):
    dimension: int

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]: ...


def check_continuations(continuations: Sequence[str]) -> None:
    if not continuations:
        raise ValueError("continuations must be non-empty")
    if len(set(continuations)) != len(continuations):
        raise ValueError("continuations must be distinct")


def call_with_retries(
    fn: Callable[[], "object"],
    attempts: int = RETRY_ATTEMPTS,
    base_delay: float = RETRY_BASE_DELAY,
    sleep: Callable[[float], None] = time.sleep,
):
    """Run ``fn``, retrying on TransportError with exponential backoff.

    Returns (result, attempts_used). Non-transport errors propagate immediately.
    """
    delay = base_delay
    for attempt in range(1, attempts + 1):
        try:
            return fn(), attempt
        except TransportError:
            if attempt == attempts:
                raise
            sleep(delay)
            delay *= 2
    raise AssertionError("unreachable")


@dataclass
class ParallelismGate:
    """Caps in-flight provider requests; shared across clients of one runtime."""

    limit: int = 8
    _sem: threading.Semaphore = field(init=False, repr=False)

    def __post_init__(self):
        self._sem = threading.Semaphore(self.limit)

    def __enter__(self):
        self._sem.acquire()
        return self

    def __exit__(self, *exc):
        self._sem.release()
        return False
