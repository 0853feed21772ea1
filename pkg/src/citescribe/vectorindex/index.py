"""Nearest-neighbor index over work embeddings.

Two backends behind one query surface: an exact scan (the correctness oracle)
and the small-world graph. Cosine is the default metric; vectors are
normalized at insert time so scaling a query never changes the result order.
Ties always break by ascending work id, which keeps results byte-stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..corpus.works import Work
from ..providers.base import Embedder, EmbeddingDimensionError
from .hnsw import HnswGraph, HnswParams

METRICS = ("cosine", "euclidean")
BACKENDS = ("exact", "approximate")


class IndexBuildError(ValueError):
    pass


class IndexQueryError(ValueError):
    pass


@dataclass(frozen=True)
class Neighbor:
    work_id: str
    distance: float


class _MatrixDistance:
    """Batch distances against the index matrix, in float64.

    ``query`` may be a node index (during graph construction) or a raw vector.
    """

    def __init__(self, matrix: np.ndarray, metric: str):
        self.matrix = matrix
        self.metric = metric
        self.count = matrix.shape[0]

    def __call__(self, query, ids: np.ndarray) -> np.ndarray:
        q = self.matrix[int(query)] if isinstance(query, (int, np.integer)) else query
        rows = self.matrix[ids]
        if self.metric == "cosine":
            return np.maximum(1.0 - rows @ q, 0.0)
        diff = rows - q
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))


class VectorIndex:
    """Immutable after build; queries are read-only and thread-safe."""

    def __init__(
        self,
        dimension: int,
        metric: str,
        backend: str,
        ids: list[str],
        matrix: np.ndarray,
        graph: Optional[HnswGraph] = None,
    ):
        self.dimension = dimension
        self.metric = metric
        self.backend = backend
        self.ids = ids
        self.matrix = matrix  # float32 rows, normalized under cosine
        self.graph = graph
        self._matrix64 = matrix.astype(np.float64)
        self._ids_array = np.asarray(ids)
        self._dist = _MatrixDistance(self._matrix64, metric)

    @property
    def count(self) -> int:
        return len(self.ids)

    def describe(self) -> dict:
        info = {
            "dimension": self.dimension,
            "metric": self.metric,
            "backend": self.backend,
            "count": self.count,
        }
        if self.graph is not None:
            p = self.graph.params
            info["hnsw"] = {
                "m": p.m,
                "ef_construction": p.ef_construction,
                "ef_search": p.ef_search,
                "seed": p.seed,
            }
        return info


def _prepare_query(index: VectorIndex, query: np.ndarray) -> np.ndarray:
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    if q.shape[0] != index.dimension:
        raise IndexQueryError(
            f"query dimension {q.shape[0]} does not match index dimension {index.dimension}"
        )
    if not np.all(np.isfinite(q)):
        raise IndexQueryError("query vector has non-finite components")
    if index.metric == "cosine":
        norm = float(np.linalg.norm(q))
        if norm == 0.0:
            raise IndexQueryError("cosine metric cannot rank a zero query vector")
        q = q / norm
    return q


def query_knn(index: VectorIndex, query: np.ndarray, k: int) -> list[Neighbor]:
    """The min(k, count) nearest works, distance-ascending, id-ascending on ties."""
    if k < 1:
        raise IndexQueryError("k must be >= 1")
    if index.count == 0:
        return []
    q = _prepare_query(index, query)
    if index.backend == "exact" or index.graph is None:
        distances = index._dist(q, np.arange(index.count))
        order = np.lexsort((index._ids_array, distances))[:k]
        return [Neighbor(index.ids[i], float(distances[i])) for i in order]
    hits = index.graph.search(q, k, index._dist)
    hits.sort(key=lambda pair: (pair[0], index.ids[pair[1]]))
    return [Neighbor(index.ids[node], float(d)) for d, node in hits]


def build_index(
    vectors: Sequence[tuple[str, np.ndarray]],
    metric: str = "cosine",
    backend: str = "exact",
    hnsw_params: Optional[HnswParams] = None,
) -> VectorIndex:
    if metric not in METRICS:
        raise IndexBuildError(f"unknown metric {metric!r}")
    if backend not in BACKENDS:
        raise IndexBuildError(f"unknown backend {backend!r}")

    ids = [work_id for work_id, _ in vectors]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise IndexBuildError(f"duplicate work ids: {dupes[:5]}")

    if ids:
        dimension = int(np.asarray(vectors[0][1]).reshape(-1).shape[0])
    else:
        dimension = 0
    rows = np.zeros((len(ids), dimension), dtype=np.float64)
    for i, (work_id, vec) in enumerate(vectors):
        v = np.asarray(vec, dtype=np.float64).reshape(-1)
        if v.shape[0] != dimension:
            raise IndexBuildError(
                f"vector for {work_id!r} has dimension {v.shape[0]}, expected {dimension}"
            )
        if not np.all(np.isfinite(v)):
            raise IndexBuildError(f"vector for {work_id!r} has non-finite components")
        if metric == "cosine":
            norm = float(np.linalg.norm(v))
            if norm == 0.0:
                raise IndexBuildError(f"vector for {work_id!r} has zero norm under cosine")
            v = v / norm
        rows[i] = v

    matrix = rows.astype(np.float32)
    graph = None
    if backend == "approximate":
        graph = HnswGraph(hnsw_params or HnswParams())
        dist = _MatrixDistance(matrix.astype(np.float64), metric)
        graph.build(dist)
    return VectorIndex(dimension, metric, backend, ids, matrix, graph)


def embed_text_for_work(work: Work, embedder: Embedder) -> np.ndarray:
    """Embed the work's title (plus abstract when present) through the provider."""
    if not work.title:
        raise ValueError("work title must be non-empty")
    vec = embedder.embed([work.embedding_text()])[0]
    if vec.shape != (embedder.dimension,):
        raise EmbeddingDimensionError(
            f"provider returned shape {vec.shape}, expected ({embedder.dimension},)"
        )
    if not np.all(np.isfinite(vec)):
        raise EmbeddingDimensionError("provider returned non-finite components")
    return vec


def embed_works(works: Sequence[Work], embedder: Embedder, batch_size: int = 64):
    """Yield (work_id, vector) pairs, batching provider calls."""
    for start in range(0, len(works), batch_size):
        batch = works[start : start + batch_size]
        vectors = embedder.embed([w.embedding_text() for w in batch])
        for work, vec in zip(batch, vectors):
            yield work.id, vec
