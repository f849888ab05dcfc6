"""Integer and real linear algebra of the incidence map.

Smith normal form over the integers gives H_1(T, Z) = Z^V / Im(D); real
kernels (ker D*, the "colorings", and ker D) come from an SVD computed
independently of the exact arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Sequence

import numpy as np
from scipy.optimize import linprog

from ._search import BudgetExceeded, integer_solutions
from .model import TileSystem

__all__ = [
    "smith_normal_form",
    "HomologyReport",
    "homology_report",
    "real_kernels",
    "is_coloring",
    "Feasibility",
    "check_real_feasibility",
    "interior_margin",
    "IntegerFeasibility",
    "check_integer_feasibility_small",
]

SVD_RTOL = 1e-10


# --------------------------------------------------------------------------
# Smith normal form
# --------------------------------------------------------------------------

def _identity(n: int) -> list[list[int]]:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(D) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Smith normal form ``U @ D @ W = S`` with exact Python integers.

    U and W are unimodular; S is diagonal with s_1 | s_2 | ... and
    nonnegative entries. Pivots are chosen with the smallest nonzero
    absolute value in the remaining block. Returned arrays have
    ``dtype=object`` so no entry ever overflows.
    """
    A = [[int(a) for a in row] for row in np.asarray(D, dtype=object).tolist()]
    m = len(A)
    n = len(A[0]) if m else 0
    U = _identity(m)
    W = _identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in W:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, q):  # row_dst += q * row_src
        if q:
            A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
            U[dst] = [a + q * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, q):  # col_dst += q * col_src
        if q:
            for row in A:
                row[dst] += q * row[src]
            for row in W:
                row[dst] += q * row[src]

    for k in range(min(m, n)):
        while True:
            best = None
            for i in range(k, m):
                for j in range(k, n):
                    a = A[i][j]
                    if a and (best is None or abs(a) < best[0]):
                        best = (abs(a), i, j)
                        if best[0] == 1:
                            break
                if best is not None and best[0] == 1:
                    break
            if best is None:
                return _finish(U, A, W)
            _, i, j = best
            swap_rows(k, i)
            swap_cols(k, j)
            p = A[k][k]
            dirty = False
            for i in range(k + 1, m):
                if A[i][k]:
                    add_row(k, i, -(A[i][k] // p))
                    dirty |= A[i][k] != 0
            for j in range(k + 1, n):
                if A[k][j]:
                    add_col(k, j, -(A[k][j] // p))
                    dirty |= A[k][j] != 0
            if dirty:
                continue
            bad = next(
                ((i, j) for i in range(k + 1, m) for j in range(k + 1, n) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(bad[0], k, 1)
        if A[k][k] < 0:
            A[k] = [-a for a in A[k]]
            U[k] = [-a for a in U[k]]
    return _finish(U, A, W)


def _finish(U, S, W):
    def arr(rows, shape):
        out = np.empty(shape, dtype=object)
        for i, row in enumerate(rows):
            for j, a in enumerate(row):
                out[i, j] = a
        return out

    m = len(S)
    n = len(W)
    return arr(U, (m, m)), arr(S, (m, n)), arr(W, (n, n))


def exact_det(M) -> int:
    """Determinant of an integer matrix by fraction-free Bareiss elimination."""
    A = [[int(a) for a in row] for row in np.asarray(M, dtype=object).tolist()]
    n = len(A)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k]), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


# --------------------------------------------------------------------------
# Homology report
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class HomologyReport:
    real_rank: int
    coloring_basis: np.ndarray  # columns: orthonormal basis of ker D*
    kernel_basis: np.ndarray  # columns: orthonormal basis of ker D
    invariant_factors: tuple[int, ...]
    torsion: tuple[int, ...]
    free_rank: int

    @property
    def dim_h1_real(self) -> int:
        return self.coloring_basis.shape[1]

    def describe(self) -> str:
        parts = [f"Z^{self.free_rank}"] if self.free_rank else []
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) if parts else "0"


def real_kernels(D: np.ndarray, rtol: float = SVD_RTOL) -> tuple[int, np.ndarray, np.ndarray]:
    """(rank, orthonormal basis of ker D^T, orthonormal basis of ker D)."""
    D = np.asarray(D, dtype=float)
    U, s, Vt = np.linalg.svd(D, full_matrices=True)
    tol = rtol * (s[0] if s.size else 0.0)
    r = int(np.sum(s > tol))
    return r, U[:, r:].copy(), Vt[r:].T.copy()


def homology_report(system: TileSystem) -> HomologyReport:
    D = system.incidence
    r, cok, ker = real_kernels(D)
    _, S, _ = smith_normal_form(D)
    diag = [int(S[i, i]) for i in range(min(S.shape)) if S[i, i] != 0]
    return HomologyReport(
        real_rank=r,
        coloring_basis=cok,
        kernel_basis=ker,
        invariant_factors=tuple(diag),
        torsion=tuple(d for d in diag if d > 1),
        free_rank=system.n_vertices - len(diag),
    )


def is_coloring(system: TileSystem, phi: Sequence[int], modulus: int | None = None) -> bool:
    """True if sum_v t_v phi(v) vanishes (mod ``modulus``) for every tile."""
    vals = system.incidence.T.astype(object) @ np.asarray([int(p) for p in phi], dtype=object)
    if modulus is None:
        return all(v == 0 for v in vals)
    return all(v % modulus == 0 for v in vals)


# --------------------------------------------------------------------------
# Real feasibility: is alpha in the cone D(R_+^T)?
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Feasibility:
    """``feasible`` with witness y (D y = alpha, y >= 0), or a Farkas functional.

    When infeasible, ``certificate`` phi satisfies phi^T D <= 0 and
    phi^T alpha > 0.
    """

    feasible: bool
    witness: np.ndarray | None
    certificate: np.ndarray | None
    exact: bool
    residual: float = 0.0

    def __bool__(self) -> bool:
        return self.feasible


def _is_exact(values) -> bool:
    return all(isinstance(a, (int, Rational)) and not isinstance(a, bool) for a in values)


def _phase_one_exact(D: list[list[int]], b: list[Fraction]):
    """Phase-1 simplex over the rationals (Bland's rule).

    Solves min 1^T a s.t. D y + a = b, y, a >= 0 and returns
    (optimal value, y, pi) where pi are the optimal duals.
    """
    m, n = len(D), len(D[0]) if D else 0
    # tableau rows: [D | I | b]
    T = [[Fraction(x) for x in D[i]] + [Fraction(int(i == j)) for j in range(m)] + [Fraction(b[i])] for i in range(m)]
    basis = [n + i for i in range(m)]
    ncol = n + m
    cost = [Fraction(0)] * n + [Fraction(1)] * m
    while True:
        # reduced costs r_j = c_j - c_B^T B^{-1} A_j
        red = [cost[j] - sum(cost[basis[i]] * T[i][j] for i in range(m)) for j in range(ncol)]
        enter = next((j for j in range(ncol) if red[j] < 0), None)
        if enter is None:
            break
        rows = [(T[i][-1] / T[i][enter], basis[i], i) for i in range(m) if T[i][enter] > 0]
        if not rows:  # unbounded cannot happen in phase 1
            raise RuntimeError("phase-1 simplex unbounded")
        _, _, piv = min(rows)
        pv = T[piv][enter]
        T[piv] = [x / pv for x in T[piv]]
        for i in range(m):
            if i != piv and T[i][enter]:
                f = T[i][enter]
                T[i] = [a - f * c for a, c in zip(T[i], T[piv])]
        basis[piv] = enter
    value = sum(T[i][-1] for i in range(m) if basis[i] >= n)
    y = [Fraction(0)] * n
    for i, j in enumerate(basis):
        if j < n:
            y[j] = T[i][-1]
    pi = [1 - red[n + i] for i in range(m)]
    return value, y, pi


def check_real_feasibility(system: TileSystem, alpha, *, tol: float = 1e-9) -> Feasibility:
    """Decide whether alpha lies in the feasible cone D(R_+^T).

    Rational input (ints/Fractions) is decided exactly; floats go through
    HiGHS with a residual check at ``tol``.
    """
    alpha = list(alpha.values()) if isinstance(alpha, dict) else list(alpha)
    if len(alpha) != system.n_vertices:
        raise ValueError("density vector has wrong length")
    if any(a < 0 for a in alpha):
        raise ValueError("densities must be nonnegative")
    Dl = system.incidence.tolist()
    if _is_exact(alpha):
        value, y, pi = _phase_one_exact(Dl, [Fraction(a) for a in alpha])
        if value == 0:
            return Feasibility(True, np.array(y, dtype=object), None, exact=True)
        return Feasibility(False, None, np.array(pi, dtype=object), exact=True)

    D = system.incidence.astype(float)
    b = np.asarray(alpha, dtype=float)
    m, n = D.shape
    A = np.hstack([D, np.eye(m)])
    c = np.concatenate([np.zeros(n), np.ones(m)])
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    if res.status != 0:
        raise RuntimeError(f"linear program failed: {res.message}")
    y = res.x[:n]
    resid = float(np.max(np.abs(D @ y - b), initial=0.0))
    if res.fun <= tol:
        return Feasibility(True, y, None, exact=False, residual=resid)
    pi = np.asarray(res.eqlin.marginals, dtype=float)
    return Feasibility(False, None, pi, exact=False, residual=resid)


def interior_margin(system: TileSystem, alpha) -> float:
    """Largest tau such that D y = alpha has a solution with every y_t >= tau.

    Positive iff alpha is in the relative interior of the feasible cone.
    Returns -inf when alpha is infeasible.
    """
    D = system.incidence.astype(float)
    b = np.asarray(alpha, dtype=float)
    m, n = D.shape
    # variables (y, tau): maximise tau, y_t - tau >= 0, tau <= 1
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_eq = np.hstack([D, np.zeros((m, 1))])
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(c, A_ub=A_ub, b_ub=np.zeros(n), A_eq=A_eq, b_eq=b,
                  bounds=[(0, None)] * n + [(None, 1.0)], method="highs")
    if res.status == 2:
        return -np.inf
    if res.status != 0:
        raise RuntimeError(f"linear program failed: {res.message}")
    return float(res.x[-1])


# --------------------------------------------------------------------------
# Integer feasibility by bounded exhaustive search
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegerFeasibility:
    verdict: str  # "FEASIBLE", "INFEASIBLE" or "UNDECIDED"
    witness: tuple[int, ...] | None = None

    @property
    def feasible(self) -> bool:
        return self.verdict == "FEASIBLE"


def check_integer_feasibility_small(system: TileSystem, N, budget: int = 1_000_000) -> IntegerFeasibility:
    """Search for integer K >= 0 with D K = N, visiting at most ``budget`` nodes."""
    N = [int(a) for a in (N.values() if isinstance(N, dict) else N)]
    try:
        for K in integer_solutions(system.incidence, N, budget=budget):
            return IntegerFeasibility("FEASIBLE", K)
    except BudgetExceeded:
        return IntegerFeasibility("UNDECIDED")
    return IntegerFeasibility("INFEASIBLE")
