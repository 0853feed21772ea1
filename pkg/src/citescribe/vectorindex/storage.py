"""Binary persistence for vector indexes.

Layout, all little-endian:
  magic "CSVECIDX" | u32 version | u32 dimension | u8 metric | u8 backend |
  u16 reserved | u64 count | ids (u16 length + utf-8 bytes each) |
  count*dimension float32 | [approximate only: graph parameters + adjacency]

Truncated or mismatched files fail with the offending byte offset.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .hnsw import HnswGraph, HnswParams
from .index import BACKENDS, METRICS, VectorIndex

MAGIC = b"CSVECIDX"
VERSION = 1


class IndexFileError(ValueError):
    pass


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.offset = 0
        self.path = path

    def take(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise IndexFileError(
                f"{self.path}: truncated index file at offset {self.offset} "
                f"(needed {size} bytes, {len(self.data) - self.offset} left)"
            )
        chunk = self.data[self.offset : self.offset + size]
        self.offset += size
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def save_index(index: VectorIndex, path: str | Path) -> None:
    parts = [
        MAGIC,
        struct.pack(
            "<IIBBHQ",
            VERSION,
            index.dimension,
            METRICS.index(index.metric),
            BACKENDS.index(index.backend),
            0,
            index.count,
        ),
    ]
    for work_id in index.ids:
        encoded = work_id.encode("utf-8")
        if len(encoded) > 0xFFFF:
            raise IndexFileError(f"work id too long to store: {work_id[:32]}...")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
    parts.append(np.ascontiguousarray(index.matrix, dtype="<f4").tobytes())
    if index.backend == "approximate" and index.graph is not None:
        g = index.graph
        p = g.params
        parts.append(
            struct.pack(
                "<IIIQqi", p.m, p.ef_construction, p.ef_search, p.seed, g.entry_point, g.max_level
            )
        )
        for node in range(index.count):
            parts.append(struct.pack("<I", g.levels[node]))
            for layer_links in g.neighbors[node]:
                parts.append(struct.pack("<I", len(layer_links)))
                parts.append(struct.pack(f"<{len(layer_links)}I", *layer_links))
    Path(path).write_bytes(b"".join(parts))


def load_index(path: str | Path) -> VectorIndex:
    reader = _Reader(Path(path).read_bytes(), str(path))
    magic = reader.take(len(MAGIC))
    if magic != MAGIC:
        raise IndexFileError(f"{path}: bad magic at offset 0: {magic!r}")
    version, dimension, metric_code, backend_code, _, count = reader.unpack("<IIBBHQ")
    if version != VERSION:
        raise IndexFileError(f"{path}: unsupported version {version} at offset {len(MAGIC)}")
    if metric_code >= len(METRICS) or backend_code >= len(BACKENDS):
        raise IndexFileError(f"{path}: unknown metric/backend codes at offset {len(MAGIC) + 8}")
    ids = []
    for _ in range(count):
        (id_len,) = reader.unpack("<H")
        ids.append(reader.take(id_len).decode("utf-8"))
    raw = reader.take(count * dimension * 4)
    matrix = np.frombuffer(raw, dtype="<f4").reshape(count, dimension).copy()
    metric = METRICS[metric_code]
    backend = BACKENDS[backend_code]
    graph = None
    if backend == "approximate":
        m, efc, efs, seed, entry_point, max_level = reader.unpack("<IIIQqi")
        graph = HnswGraph(HnswParams(m=m, ef_construction=efc, ef_search=efs, seed=seed))
        graph.entry_point = int(entry_point)
        graph.max_level = int(max_level)
        for _ in range(count):
            (level,) = reader.unpack("<I")
            graph.levels.append(level)
            layers = []
            for _ in range(level + 1):
                (n_links,) = reader.unpack("<I")
                layers.append(list(reader.unpack(f"<{n_links}I")))
            graph.neighbors.append(layers)
    if reader.offset != len(reader.data):
        raise IndexFileError(
            f"{path}: {len(reader.data) - reader.offset} trailing bytes at offset {reader.offset}"
        )
    return VectorIndex(dimension, metric, backend, ids, matrix, graph)
