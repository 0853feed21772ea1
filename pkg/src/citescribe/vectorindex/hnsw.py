"""Navigable small-world graph for approximate nearest-neighbor search.

Classic multi-layer construction: exponentially distributed node levels,
greedy descent through upper layers, beam search with a candidate heap at the
target layer, and diversity-aware neighbor selection. Distances are computed
in float64 against the owning index's matrix so results are reproducible.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class HnswParams:
    m: int = 16
    ef_construction: int = 200
    ef_search: int = 64
    seed: int = 0

    def __post_init__(self):
        if self.m < 2 or self.ef_construction < 1 or self.ef_search < 1:
            raise ValueError("invalid graph parameters")


class HnswGraph:
    def __init__(self, params: HnswParams):
        self.params = params
        self.levels: list[int] = []
        # neighbors[node][layer] -> list of neighbor node indices
        self.neighbors: list[list[list[int]]] = []
        self.entry_point: int = -1
        self.max_level: int = -1
        self._ml = 1.0 / math.log(params.m)

    # -- construction ------------------------------------------------------

    def build(self, distance_fn) -> None:
        """Insert nodes 0..n-1 in order; distance_fn(query_idx, ids) -> float64s."""
        rng = np.random.Generator(np.random.PCG64(self.params.seed))
        n = distance_fn.count
        for node in range(n):
            level = int(-math.log(max(rng.random(), 1e-12)) * self._ml)
            self._insert(node, level, distance_fn)

    def _insert(self, node: int, level: int, dist) -> None:
        self.levels.append(level)
        self.neighbors.append([[] for _ in range(level + 1)])
        if self.entry_point < 0:
            self.entry_point = node
            self.max_level = level
            return

        ep = [self.entry_point]
        for layer in range(self.max_level, level, -1):
            ep = [self._greedy(node, ep[0], layer, dist)]

        m = self.params.m
        for layer in range(min(level, self.max_level), -1, -1):
            candidates = self._search_layer(node, ep, layer, self.params.ef_construction, dist)
            max_links = m * 2 if layer == 0 else m
            chosen = self._select_diverse(candidates, m, dist)
            self.neighbors[node][layer] = list(chosen)
            for other in chosen:
                links = self.neighbors[other][layer]
                links.append(node)
                if len(links) > max_links:
                    pairs = sorted(
                        zip(dist(other, np.asarray(links, dtype=np.int64)), links)
                    )
                    self.neighbors[other][layer] = self._select_diverse(
                        pairs, max_links, dist
                    )
            ep = [c for _, c in candidates]
        if level > self.max_level:
            self.max_level = level
            self.entry_point = node

    def _select_diverse(self, candidates: list[tuple[float, int]], m: int, dist) -> list[int]:
        """Keep up to m candidates, preferring ones closer to the query than to
        anything already kept; backfill with the nearest rejects."""
        if len(candidates) <= m:
            return [c for _, c in candidates]
        kept: list[int] = []
        rejected: list[tuple[float, int]] = []
        for d, c in candidates:
            if len(kept) >= m:
                break
            if not kept:
                kept.append(c)
                continue
            to_kept = dist(c, np.asarray(kept, dtype=np.int64))
            if d < float(np.min(to_kept)):
                kept.append(c)
            else:
                rejected.append((d, c))
        for d, c in rejected:
            if len(kept) >= m:
                break
            kept.append(c)
        return kept

    # -- search ------------------------------------------------------------

    def _greedy(self, query, entry: int, layer: int, dist) -> int:
        best = entry
        best_d = float(dist(query, np.asarray([entry], dtype=np.int64))[0])
        improved = True
        while improved:
            improved = False
            links = self.neighbors[best][layer]
            if not links:
                break
            ds = dist(query, np.asarray(links, dtype=np.int64))
            i = int(np.argmin(ds))
            if float(ds[i]) < best_d:
                best, best_d = links[i], float(ds[i])
                improved = True
        return best

    def _search_layer(
        self, query, entries: list[int], layer: int, ef: int, dist
    ) -> list[tuple[float, int]]:
        visited = set(entries)
        entry_d = dist(query, np.asarray(entries, dtype=np.int64))
        candidates = [(float(d), e) for d, e in zip(entry_d, entries)]
        heapq.heapify(candidates)
        results = [(-d, e) for d, e in candidates]
        heapq.heapify(results)
        while candidates:
            d, node = heapq.heappop(candidates)
            if len(results) >= ef and d > -results[0][0]:
                break
            fresh = [x for x in self.neighbors[node][layer] if x not in visited]
            if not fresh:
                continue
            visited.update(fresh)
            ds = dist(query, np.asarray(fresh, dtype=np.int64))
            for fd, fnode in zip(ds, fresh):
                fd = float(fd)
                if len(results) < ef:
                    heapq.heappush(candidates, (fd, fnode))
                    heapq.heappush(results, (-fd, fnode))
                elif fd < -results[0][0]:
                    heapq.heappush(candidates, (fd, fnode))
                    heapq.heappushpop(results, (-fd, fnode))
        return sorted((-d, node) for d, node in results)

    def search(self, query, k: int, dist, ef_search: int | None = None) -> list[tuple[float, int]]:
        if self.entry_point < 0:
            return []
        ef = max(ef_search or self.params.ef_search, k)
        ep = self.entry_point
        for layer in range(self.max_level, 0, -1):
            ep = self._greedy(query, ep, layer, dist)
        found = self._search_layer(query, [ep], 0, ef, dist)
        return found[:k]
