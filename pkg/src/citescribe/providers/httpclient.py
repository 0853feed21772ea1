"""HTTP JSON provider clients.

Wire contract (all POST, JSON bodies, UTF-8):
  {provider_url}/generate  {prompt, max_tokens, temperature, stop}
                           -> {text, finish_reason}
  {provider_url}/score     {prompt, continuations: [..]}
                           -> {scores: [{continuation, logprob}, ..]}
  {embed_url}/embed        {texts: [..]} -> {vectors: [[..], ..]}

Transport failures and 5xx responses retry (3 attempts, exponential backoff
from 250 ms); 4xx responses are terminal rejections.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import requests

from .base import (
    ContinuationScore,
    EmbeddingDimensionError,
    GenerationRequest,
    GenerationResult,
    ParallelismGate,
    ProviderRejection,
    TransportError,
    call_with_retries,
    check_continuations,
)


class ResponseCache:
    """Optional on-disk response cache keyed by request hash."""

    def __init__(self, directory: str | Path):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def _path(self, payload: dict[str, Any]) -> Path:
        digest = hashlib.sha256(
            json.dumps(payload, sort_keys=True, ensure_ascii=False).encode("utf-8")
        ).hexdigest()
        return self.directory / f"{digest}.json"

    def get(self, payload: dict[str, Any]) -> dict[str, Any] | None:
        path = self._path(payload)
        if path.is_file():
            return json.loads(path.read_text(encoding="utf-8"))
        return None

    def put(self, payload: dict[str, Any], response: dict[str, Any]) -> None:
        self._path(payload).write_text(
            json.dumps(response, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )


class _HttpBase:
    def __init__(
        self,
        base_url: str,
        api_key: str = "",
        timeout: float = 60.0,
        session: requests.Session | None = None,
        gate: ParallelismGate | None = None,
        cache: ResponseCache | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.api_key = api_key
        self.timeout = timeout
        self.session = session or requests.Session()
        self.gate = gate or ParallelismGate()
        self.cache = cache
        self._sleep = sleep

    def _post(self, endpoint: str, payload: dict[str, Any]) -> dict[str, Any]:
        cache_key = {"endpoint": endpoint, **payload}
        if self.cache is not None:
            hit = self.cache.get(cache_key)
            if hit is not None:
                return hit

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"

        def attempt() -> dict[str, Any]:
            with self.gate:
                try:
                    response = self.session.post(
                        f"{self.base_url}/{endpoint}",
                        json=payload,
                        headers=headers,
                        timeout=self.timeout,
                    )
                except requests.RequestException as exc:
                    raise TransportError(str(exc)) from exc
            if response.status_code >= 500:
                raise TransportError(f"{endpoint}: server error {response.status_code}")
            if response.status_code >= 400:
                raise ProviderRejection(
                    f"{endpoint}: rejected with {response.status_code}: {response.text[:200]}"
                )
            return response.json()

        body, _ = call_with_retries(attempt, sleep=self._sleep)
        if self.cache is not None:
            self.cache.put(cache_key, body)
        return body


class HttpTextProvider(_HttpBase):
    """Text generation plus continuation scoring against one provider URL."""

    def generate(self, request: GenerationRequest) -> GenerationResult:
        body = self._post(
            "generate",
            {
                "prompt": request.prompt,
                "max_tokens": request.max_tokens,
                "temperature": request.temperature,
                "stop": list(request.stop),
            },
        )
        return GenerationResult(
            text=str(body["text"]), finish_reason=str(body.get("finish_reason", "stop"))
        )

    def score_continuations(
        self, prompt: str, continuations: Sequence[str]
    ) -> list[ContinuationScore]:
        check_continuations(continuations)
        body = self._post("score", {"prompt": prompt, "continuations": list(continuations)})
        by_text = {s["continuation"]: float(s["logprob"]) for s in body["scores"]}
        missing = [c for c in continuations if c not in by_text]
        if missing:
            raise ProviderRejection(f"score: response missing continuations {missing}")
        return [ContinuationScore(c, by_text[c]) for c in continuations]


class HttpEmbedder(_HttpBase):
    """Embedding client; validates the configured dimension on every batch."""

    def __init__(self, base_url: str, dimension: int, **kwargs):
        super().__init__(base_url, **kwargs)
        self.dimension = dimension

    def embed(self, texts: Sequence[str]) -> list[np.ndarray]:
        if not texts:
            raise ValueError("texts must be non-empty")
        body = self._post("embed", {"texts": list(texts)})
        vectors = [np.asarray(v, dtype=np.float32) for v in body["vectors"]]
        if len(vectors) != len(texts):
            raise ProviderRejection("embed: response count does not match request")
        for vec in vectors:
            if vec.shape != (self.dimension,):
                raise EmbeddingDimensionError(
                    f"expected dimension {self.dimension}, got {vec.shape}"
                )
        return vectors
