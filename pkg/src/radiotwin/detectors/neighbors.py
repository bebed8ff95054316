"""Exact k-nearest-neighbor search for the density-based detectors.

Two interchangeable routes: brute force (compiled kernel when available)
and a vantage-point tree. Both return the same neighbor sets, sorted by
ascending distance with ties broken by ascending reference index. The tree
only pays off for very large reference sets, so dispatch switches to it
above VP_TREE_MIN_REF; below that brute force wins in <= 100 dimensions.
"""

from __future__ import annotations

import heapq

import numpy as np

from .. import kernels

VP_TREE_MIN_REF = 50_000
_LEAF_SIZE = 16


class _Node:
    __slots__ = ("vantage", "radius", "inner", "outer", "leaf_indices")

    def __init__(self, vantage=-1, radius=0.0, inner=None, outer=None, leaf_indices=None):
        self.vantage = vantage
        self.radius = radius
        self.inner = inner
        self.outer = outer
        self.leaf_indices = leaf_indices


def _dist_to_many(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    diff = points - q
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


class VpTree:
    """Exact metric tree over a fixed reference set (Euclidean distance)."""

    def __init__(self, ref: np.ndarray):
        self.ref = np.ascontiguousarray(ref, dtype=np.float64)
        self.root = self._build(np.arange(len(self.ref), dtype=np.int64))

    def _build(self, indices: np.ndarray) -> _Node | None:
        if len(indices) == 0:
            return None
        if len(indices) <= _LEAF_SIZE:
            return _Node(leaf_indices=indices)
        vantage = int(indices[0])
        rest = indices[1:]
        d = _dist_to_many(self.ref[rest], self.ref[vantage])
        # nearest-rank median keeps the split deterministic under ties
        order = np.argsort(d, kind="stable")
        mid = len(rest) // 2
        radius = float(d[order[mid]])
        inner_mask = d <= radius
        inner = rest[inner_mask]
        outer = rest[~inner_mask]
        if len(inner) == len(rest) or len(outer) == len(rest):
            # no progress (all distances tied): fall back to a flat bucket
            return _Node(leaf_indices=indices)
        return _Node(vantage, radius, self._build(inner), self._build(outer))

    def query(self, queries: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """k nearest reference points per query row, ties by index."""
        queries = np.ascontiguousarray(queries, dtype=np.float64)
        n_query = len(queries)
        if not 1 <= k <= len(self.ref):
            raise ValueError(f"k={k} out of range for {len(self.ref)} reference points")
        idx_out = np.empty((n_query, k), dtype=np.int64)
        dist_out = np.empty((n_query, k), dtype=np.float64)
        for qi in range(n_query):
            idx_out[qi], dist_out[qi] = self._query_one(queries[qi], k)
        return idx_out, dist_out

    def _query_one(self, q: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        # heap holds (-d, -idx): the lexicographically worst neighbor on top
        heap: list[tuple[float, int]] = []

        def offer(d: float, idx: int) -> None:
            if len(heap) < k:
                heapq.heappush(heap, (-d, -idx))
            else:
                worst_d, worst_i = -heap[0][0], -heap[0][1]
                if d < worst_d or (d == worst_d and idx < worst_i):
                    heapq.heapreplace(heap, (-d, -idx))

        def worst() -> float:
            return -heap[0][0] if len(heap) == k else np.inf

        stack = [self.root]
        while stack:
            node = stack.pop()
            if node is None:
                continue
            if node.leaf_indices is not None:
                for d, idx in zip(
                    _dist_to_many(self.ref[node.leaf_indices], q), node.leaf_indices
                ):
                    offer(float(d), int(idx))
                continue
            diff = self.ref[node.vantage] - q
            d_v = float(np.sqrt(np.dot(diff, diff)))
            offer(d_v, node.vantage)
            # visit the side containing q first, prune only on strict excess
            if d_v <= node.radius:
                near, far, margin = node.inner, node.outer, node.radius - d_v
            else:
                near, far, margin = node.outer, node.inner, d_v - node.radius
            if margin <= worst():
                stack.append(far)
            stack.append(near)
        pairs = sorted((-d, -i) for d, i in heap)
        idx = np.array([i for _, i in pairs], dtype=np.int64)
        dist = np.array([d for d, _ in pairs], dtype=np.float64)
        return idx, dist


def knn(
    ref: np.ndarray,
    query: np.ndarray,
    k: int,
    exclude_self: bool = False,
    force: str | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Exact kNN with route dispatch by reference-set size.

    force="brute"/"vptree" overrides the size threshold (used by tests and
    benchmarks). With exclude_self=True, query must be the ref array and
    reference row i is excluded from the neighbors of query row i.
    """
    ref = np.ascontiguousarray(ref, dtype=np.float64)
    query = np.ascontiguousarray(query, dtype=np.float64)
    route = force or ("vptree" if len(ref) > VP_TREE_MIN_REF else "brute")
    if route == "brute":
        return kernels.knn_brute(ref, query, k, exclude_self)
    if route != "vptree":
        raise ValueError(f"unknown knn route {route!r}")

    tree = VpTree(ref)
    if not exclude_self:
        return tree.query(query, k)
    limit = len(ref) - 1
    if not 1 <= k <= limit:
        raise ValueError(f"k={k} out of range for {len(ref)} reference points")
    idx_all, dist_all = tree.query(query, k + 1)
    idx_out = np.empty((len(query), k), dtype=np.int64)
    dist_out = np.empty((len(query), k), dtype=np.float64)
    for i in range(len(query)):
        keep = idx_all[i] != i
        if keep.sum() == k + 1:
            keep[-1] = False  # self not among the k+1: drop the worst instead
        idx_out[i] = idx_all[i][keep]
        dist_out[i] = dist_all[i][keep]
    return idx_out, dist_out
