"""Pure-numpy implementations of the hot kernels.

Drop-in fallback for the compiled module: same signatures, same semantics
(neighbor ties broken by index, identical bound handling in the dual solver).
Used automatically when the extension is unavailable or when
RADIOTWIN_KERNELS=python is set.
"""

from __future__ import annotations

import numpy as np

# Cap on the size of temporary (query x ref) distance blocks, in elements.
_BLOCK_ELEMS = 2**25


def _as_c_f64(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape (len(a), len(b))."""
    a = _as_c_f64(a)
    b = _as_c_f64(b)
    a_sq = np.einsum("ij,ij->i", a, a)
    b_sq = np.einsum("ij,ij->i", b, b)
    d = a @ b.T
    d *= -2.0
    d += a_sq[:, None]
    d += b_sq[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def knn_brute(
    ref: np.ndarray, query: np.ndarray, k: int, exclude_self: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Exact k nearest neighbors of each query row among the ref rows.

    Returns (indices, distances), both (n_query, k), neighbors sorted by
    ascending distance with ties broken by ascending ref index. With
    exclude_self=True, query must be the ref array itself and ref row i is
    removed from the candidates of query row i.
    """
    ref = _as_c_f64(ref)
    query = _as_c_f64(query)
    n_ref = ref.shape[0]
    n_query = query.shape[0]
    limit = n_ref - 1 if exclude_self else n_ref
    if not 1 <= k <= limit:
        raise ValueError(f"k={k} out of range for {n_ref} reference points")

    idx_out = np.empty((n_query, k), dtype=np.int64)
    dist_out = np.empty((n_query, k), dtype=np.float64)
    block = max(1, _BLOCK_ELEMS // max(n_ref, 1))
    for start in range(0, n_query, block):
        stop = min(start + block, n_query)
        d = pairwise_sq_dists(query[start:stop], ref)
        if exclude_self:
            rows = np.arange(start, stop)
            d[rows - start, rows] = np.inf
        # stable sort: equal distances keep ascending index order
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        idx_out[start:stop] = order
        dist_out[start:stop] = np.take_along_axis(d, order, axis=1)
    np.sqrt(dist_out, out=dist_out)
    return idx_out, dist_out


def min_sq_dist(ref: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Per query row, the smallest squared distance to any ref row."""
    ref = _as_c_f64(ref)
    query = _as_c_f64(query)
    n_ref = ref.shape[0]
    n_query = query.shape[0]
    out = np.empty(n_query, dtype=np.float64)
    block = max(1, _BLOCK_ELEMS // max(n_ref, 1))
    for start in range(0, n_query, block):
        stop = min(start + block, n_query)
        d = pairwise_sq_dists(query[start:stop], ref)
        out[start:stop] = d.min(axis=1)
    return out


def smo_one_class(
    gram: np.ndarray, box: float, tol: float, max_iter: int
) -> tuple[np.ndarray, float, int, float]:
    """Most-violating-pair SMO for the one-class dual.

    Minimizes 0.5 * a' K a subject to 0 <= a_i <= box and sum(a) = 1.
    Returns (alpha, rho, iterations, final KKT gap). rho is the average
    decision value over free support vectors (midpoint of the feasible
    interval when no alpha is strictly inside the box).
    """
    gram = _as_c_f64(gram)
    n = gram.shape[0]
    alpha = np.zeros(n, dtype=np.float64)
    # box = 1/(nu*n): the first floor(nu*n) slots start at the bound and one
    # partial slot absorbs the remainder of the sum-to-one constraint.
    n_full = min(int(np.floor(1.0 / box + 1e-9)), n)
    alpha[:n_full] = box
    remainder = 1.0 - n_full * box
    if remainder > 1e-12 and n_full < n:
        alpha[n_full] = min(remainder, box)

    active = alpha > 0.0
    grad = gram[:, active] @ alpha[active]

    gap = np.inf
    it = 0
    while it < max_iter:
        up = alpha < box
        down = alpha > 0.0
        g_up = np.where(up, grad, np.inf)
        g_down = np.where(down, grad, -np.inf)
        i = int(np.argmin(g_up))
        j = int(np.argmax(g_down))
        gap = grad[j] - grad[i]
        if gap <= tol:
            break
        eta = gram[i, i] + gram[j, j] - 2.0 * gram[i, j]
        if eta <= 0.0:
            eta = 1e-12
        step = gap / eta
        room_i = box - alpha[i]
        room_j = alpha[j]
        if step >= room_i and room_i <= room_j:
            step = room_i
            alpha[i] = box
            alpha[j] -= step
        elif step >= room_j:
            step = room_j
            alpha[i] += step
            alpha[j] = 0.0
        else:
            alpha[i] += step
            alpha[j] -= step
        grad += step * gram[i]
        grad -= step * gram[j]
        it += 1

    free = (alpha > 0.0) & (alpha < box)
    if np.any(free):
        rho = float(grad[free].mean())
    else:
        lower = float(np.max(grad[alpha >= box])) if np.any(alpha >= box) else -np.inf
        upper = float(np.min(grad[alpha <= 0.0])) if np.any(alpha <= 0.0) else np.inf
        if not np.isfinite(lower):
            rho = upper
        elif not np.isfinite(upper):
            rho = lower
        else:
            rho = 0.5 * (lower + upper)
    return alpha, rho, it, float(max(gap, 0.0))
