"""Depth-first search for nonnegative integer solutions of D K = N."""

from __future__ import annotations

from typing import Iterator, Sequence

import numpy as np


class BudgetExceeded(RuntimeError):
    """The search visited more nodes than allowed."""


def integer_solutions(D: np.ndarray, N: Sequence[int], budget: int | None = None) -> Iterator[tuple[int, ...]]:
    """Yield every K >= 0 with D K = N in lexicographic order.

    Tiles are assigned in column order. K_t is bounded by the remaining
    capacity min_v floor(R_v / t_v); when a column is the last one touching
    some vertex its value is forced.
    """
    D = np.asarray(D, dtype=np.int64)
    n_v, n_t = D.shape
    N = [int(a) for a in N]
    if len(N) != n_v:
        raise ValueError("multiplicity vector has wrong length")
    if any(a < 0 for a in N):
        return
    cols = [[(v, int(D[v, t])) for v in range(n_v) if D[v, t]] for t in range(n_t)]
    last = [-1] * n_v
    for t in range(n_t):
        for v, _ in cols[t]:
            last[v] = t
    if any(last[v] < 0 and N[v] > 0 for v in range(n_v)):
        return
    closing = [[v for v in range(n_v) if last[v] == t] for t in range(n_t)]

    R = list(N)
    K = [0] * n_t
    nodes = 0

    def rec(j: int) -> Iterator[tuple[int, ...]]:
        nonlocal nodes
        nodes += 1
        if budget is not None and nodes > budget:
            raise BudgetExceeded(f"search exceeded {budget} nodes")
        if j == n_t:
            yield tuple(K)
            return
        col = cols[j]
        hi = min(R[v] // m for v, m in col)
        lo = 0
        forced = None
        for v in closing[j]:
            m = int(D[v, j])
            if R[v] % m:
                return
            f = R[v] // m
            if f > hi or (forced is not None and f != forced):
                return
            forced = lo = hi = f
        for k in range(lo, hi + 1):
            for v, m in col:
                R[v] -= k * m
            K[j] = k
            yield from rec(j + 1)
            for v, m in col:
                R[v] += k * m
        K[j] = 0

    yield from rec(0)
