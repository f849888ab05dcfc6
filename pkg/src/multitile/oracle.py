"""Exact ground truth at desk scale.

Counts of N-fold tilings come from the closed formula

    #tilings(K) = prod_v N_v! / (prod_t K_t! prod_{v,t} (t_v!)^{K_t})

summed over all tile-count vectors K with D K = N, and independently from
an explicit search over partitions of the blow-up vertex set. Floats never
enter either path when the weights are ints or Fractions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from numbers import Rational
from typing import Sequence

import numpy as np

from ._search import BudgetExceeded, integer_solutions
from .model import TileSystem

__all__ = [
    "BudgetExceeded",
    "ExactDistribution",
    "enumerate_tile_count_vectors",
    "count_labelled_tilings",
    "partition_function",
    "tiling_weight",
    "exact_distribution",
    "brute_force_blowup_tilings",
    "BLOWUP_CAP",
]

BLOWUP_CAP = 14
DEFAULT_BUDGET = 5_000_000


def _as_N(system: TileSystem, N) -> list[int]:
    if isinstance(N, dict):
        N = [N[v] for v in system.vertices]
    N = [int(a) for a in N]
    if len(N) != system.n_vertices:
        raise ValueError(f"expected {system.n_vertices} multiplicities, got {len(N)}")
    return N


def enumerate_tile_count_vectors(system: TileSystem, N, budget: int | None = DEFAULT_BUDGET) -> list[tuple[int, ...]]:
    """All K >= 0 with D K = N, lexicographically sorted."""
    return list(integer_solutions(system.incidence, _as_N(system, N), budget=budget))


def count_labelled_tilings(system: TileSystem, N, K: Sequence[int]) -> int:
    """Number of N-fold tilings using tile t exactly K_t times."""
    N = _as_N(system, N)
    K = [int(k) for k in K]
    D = system.incidence
    if len(K) != system.n_tiles or any(k < 0 for k in K):
        raise ValueError("tile-count vector has wrong length or negative entries")
    if any(int(a) != b for a, b in zip(D @ np.array(K, dtype=np.int64), N)):
        raise ValueError("D K != N")
    num = math.prod(math.factorial(a) for a in N)
    den = math.prod(math.factorial(k) for k in K)
    for t, k in zip(system.tiles, K):
        for _, m in t.items():
            den *= math.factorial(m) ** k
    q, r = divmod(num, den)
    assert r == 0, "multinomial count is not an integer"
    return q


def _weight_power(w, k: int):
    if isinstance(w, Rational):
        return Fraction(w) ** k
    return float(w) ** k


def tiling_weight(system: TileSystem, K: Sequence[int]):
    exact = all(isinstance(w, Rational) for w in system.weights)
    acc = Fraction(1) if exact else 1.0
    for w, k in zip(system.weights, K):
        if k:
            acc *= _weight_power(w, k)
    return acc


def partition_function(system: TileSystem, N, budget: int | None = DEFAULT_BUDGET):
    """Z(w, N); exact ``Fraction``/``int`` for rational weights, else float."""
    total = 0
    for K in enumerate_tile_count_vectors(system, N, budget):
        total += count_labelled_tilings(system, N, K) * tiling_weight(system, K)
    if isinstance(total, Fraction) and total.denominator == 1:
        return int(total)
    return total


@dataclass(frozen=True)
class ExactDistribution:
    """Exact law of the tile-count vector under the multinomial tiling measure."""

    vectors: tuple[tuple[int, ...], ...]
    weights: tuple[Fraction, ...]

    @cached_property
    def total(self):
        return sum(self.weights, Fraction(0))

    @cached_property
    def probabilities(self) -> tuple[Fraction, ...]:
        z = self.total
        return tuple(w / z for w in self.weights)

    def mean(self) -> list[Fraction]:
        n = len(self.vectors[0]) if self.vectors else 0
        out = [Fraction(0)] * n
        for K, p in zip(self.vectors, self.probabilities):
            for t, k in enumerate(K):
                if k:
                    out[t] += p * k
        return out

    def second_moment(self) -> list[list[Fraction]]:
        n = len(self.vectors[0]) if self.vectors else 0
        out = [[Fraction(0)] * n for _ in range(n)]
        for K, p in zip(self.vectors, self.probabilities):
            nz = [(t, k) for t, k in enumerate(K) if k]
            for s, ks in nz:
                for t, kt in nz:
                    out[s][t] += p * ks * kt
        return out

    def covariance(self) -> list[list[Fraction]]:
        mu = self.mean()
        m2 = self.second_moment()
        return [[m2[s][t] - mu[s] * mu[t] for t in range(len(mu))] for s in range(len(mu))]

    def covariance_array(self) -> np.ndarray:
        return np.array([[float(c) for c in row] for row in self.covariance()])


def exact_distribution(system: TileSystem, N, budget: int | None = DEFAULT_BUDGET) -> ExactDistribution:
    vecs = enumerate_tile_count_vectors(system, N, budget)
    if not vecs:
        raise ValueError("multiplicity vector is not feasible")
    if not all(isinstance(w, Rational) for w in system.weights):
        raise TypeError("exact_distribution needs int or Fraction weights")
    ws = tuple(Fraction(count_labelled_tilings(system, N, K)) * tiling_weight(system, K) for K in vecs)
    return ExactDistribution(tuple(vecs), ws)


def brute_force_blowup_tilings(system: TileSystem, N, *, weighted: bool = False, cap: int = BLOWUP_CAP):
    """Count partitions of the N-fold blow-up into tile lifts by explicit search.

    Copies of vertex v are ``(v, 0..N_v-1)``. The block containing the
    lowest uncovered copy is chosen first, so each partition is produced
    exactly once. With ``weighted`` the product of tile weights is summed
    instead of 1.
    """
    N = _as_N(system, N)
    if sum(N) > cap:
        raise ValueError(f"blow-up has {sum(N)} vertices; cap is {cap}")
    idx = system.index
    tiles = [[(idx[v], m) for v, m in t.items()] for t in system.tiles]
    weights = [Fraction(w) if isinstance(w, Rational) else float(w) for w in system.weights]
    free = [set(range(a)) for a in N]
    order = [(v, i) for v in range(len(N)) for i in range(N[v])]

    from itertools import combinations

    def lifts(tile, anchor_v, anchor_i):
        """All ways to pick t_u uncovered copies at each u, anchor included."""
        choices = []
        for u, m in tile:
            pool = sorted(free[u])
            if u == anchor_v:
                rest = [c for c in pool if c != anchor_i]
                choices.append([(u, (anchor_i,) + c) for c in combinations(rest, m - 1)])
            else:
                choices.append([(u, c) for c in combinations(pool, m)])
        out = [[]]
        for ch in choices:
            out = [prev + [c] for prev in out for c in ch]
        return out

    def rec(pos):
        while pos < len(order) and order[pos][1] not in free[order[pos][0]]:
            pos += 1
        if pos == len(order):
            return 1
        v, i = order[pos]
        total = 0
        for k, tile in enumerate(tiles):
            if not any(u == v for u, _ in tile):
                continue
            if any(len(free[u]) < m for u, m in tile):
                continue
            for lift in lifts(tile, v, i):
                for u, cs in lift:
                    free[u].difference_update(cs)
                sub = rec(pos + 1)
                if sub:
                    total += sub * weights[k] if weighted else sub
                for u, cs in lift:
                    free[u].update(cs)
        return total

    result = rec(0)
    if isinstance(result, Fraction) and result.denominator == 1:
        return int(result)
    return result
