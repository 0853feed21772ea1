from .hnsw import HnswGraph, HnswParams
from .index import (
    BACKENDS,
    METRICS,
    IndexBuildError,
    IndexQueryError,
    Neighbor,
    VectorIndex,
    build_index,
    embed_text_for_work,
    embed_works,
    query_knn,
)
from .storage import IndexFileError, load_index, save_index

__all__ = [
    "BACKENDS",
    "METRICS",
    "HnswGraph",
    "HnswParams",
    "IndexBuildError",
    "IndexFileError",
    "IndexQueryError",
    "Neighbor",
    "VectorIndex",
    "build_index",
    "embed_text_for_work",
    "embed_works",
    "load_index",
    "query_knn",
    "save_index",
]
