"""Critical gauge by convex minimisation of F(X) - alpha . X.

Working in X = log x, the free energy F(X) = log P(e^X) is convex with
Hessian equal to the covariance of the tile exponent vector under tile
probabilities p_t = w_t x_t / P. It is flat along ker D* and along the
constant vector, so Newton steps are taken in the orthogonal complement
of those directions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .homology import check_real_feasibility, interior_margin, real_kernels
from .model import TileSystem, log_tiling_polynomial

__all__ = [
    "FreeEnergyValue",
    "GaugeSolution",
    "SolverOptions",
    "InfeasibleDensityError",
    "BoundaryDensityError",
    "ConvergenceError",
    "free_energy",
    "solve_critical_gauge",
    "tile_probabilities",
    "solve_bipartite_dimer_gauge",
    "growth_rate",
]

log = logging.getLogger(__name__)


class InfeasibleDensityError(ValueError):
    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class BoundaryDensityError(ValueError):
    def __init__(self, message, vanishing_tiles=()):
        super().__init__(message)
        self.vanishing_tiles = tuple(vanishing_tiles)


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=np.inf, iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class FreeEnergyValue:
    F: float
    gradient: np.ndarray
    hessian: np.ndarray | None = None


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-10
    max_iter: int = 500
    armijo: float = 1e-4
    tikhonov: float = 1e-12
    check_interior: bool = True
    underflow: float = 1e-14


@dataclass(frozen=True)
class GaugeSolution:
    """Normalised critical gauge.

    ``X`` is shifted so P(e^X) = 1 and has no component along ker D*; the
    critical weights are then the tile probabilities.
    """

    system: TileSystem = field(repr=False)
    alpha: np.ndarray
    X: np.ndarray
    critical_weights: np.ndarray
    sigma: float
    converged: bool
    iterations: int
    residual: float
    objective_trace: tuple[float, ...] = field(default=(), repr=False)

    @property
    def x(self) -> np.ndarray:
        return np.exp(self.X)


def _tile_probs(system: TileSystem, X: np.ndarray) -> tuple[float, np.ndarray]:
    terms = system.log_monomial_offsets + system.incidence.T @ X
    m = terms.max()
    e = np.exp(terms - m)
    s = e.sum()
    return float(m + np.log(s)), e / s


def free_energy(system: TileSystem, X, *, hessian: bool = True) -> FreeEnergyValue:
    """F(X) = log P(e^X) with gradient x_v P_{x_v} / P and optional Hessian."""
    X = np.asarray(X, dtype=float)
    F, p = _tile_probs(system, X)
    D = system.incidence.astype(float)
    g = D @ p
    H = None
    if hessian:
        H = (D * p) @ D.T - np.outer(g, g)
    return FreeEnergyValue(F, g, H)


def _flat_directions(system: TileSystem) -> np.ndarray:
    """Orthonormal basis of span(ker D*, 1): the directions F - alpha.X ignores."""
    _, cok, _ = real_kernels(system.incidence)
    M = np.column_stack([cok, np.ones(system.n_vertices)])
    r, basis, _ = _orth(M)
    return basis


def _orth(M: np.ndarray):
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > 1e-10 * (s[0] if s.size else 0.0)))
    return r, U[:, :r], None


def _normalise(system: TileSystem, X: np.ndarray, cok: np.ndarray) -> np.ndarray:
    """Zero the ker D* component, then shift along proj(1) so that P = 1."""
    X = X - cok @ (cok.T @ X)
    d = np.ones(system.n_vertices) - cok @ (cok.T @ np.ones(system.n_vertices))
    delta = system.delta
    F = log_tiling_polynomial(system, X)
    return X - (F / delta) * d


def _check_alpha(system: TileSystem, alpha: np.ndarray, opts: SolverOptions) -> None:
    if alpha.shape != (system.n_vertices,):
        raise ValueError(f"expected {system.n_vertices} densities, got shape {alpha.shape}")
    if np.any(alpha < 0):
        raise InfeasibleDensityError("densities must be nonnegative")
    delta = system.delta
    if abs(alpha.sum() - delta) > 1e-9 * max(1.0, delta):
        raise InfeasibleDensityError(f"densities sum to {alpha.sum():.12g}, tiles have size {delta}")
    feas = check_real_feasibility(system, alpha)
    if not feas.feasible:
        raise InfeasibleDensityError("density vector lies outside the feasible cone", feas.certificate)
    if opts.check_interior:
        tau = interior_margin(system, alpha)
        if tau <= 1e-12:
            raise BoundaryDensityError(
                "density vector lies on the boundary of the feasible cone",
                _vanishing_tiles(system, alpha),
            )


def _vanishing_tiles(system: TileSystem, alpha: np.ndarray) -> list[int]:
    from scipy.optimize import linprog

    D = system.incidence.astype(float)
    out = []
    for t in range(system.n_tiles):
        c = np.zeros(system.n_tiles)
        c[t] = -1.0
        res = linprog(c, A_eq=D, b_eq=alpha, bounds=(0, None), method="highs")
        if res.status == 0 and -res.fun <= 1e-12:
            out.append(t)
    return out


def solve_critical_gauge(system: TileSystem, alpha, opts: SolverOptions | None = None, *, X0=None) -> GaugeSolution:
    """Critical gauge for densities ``alpha`` by projected damped Newton.

    Minimises G(X) = F(X) - alpha . X. Gradient and Newton step live in
    the orthogonal complement of span(ker D*, 1); the reduced Newton system
    carries a Tikhonov floor. Stops when the sup-norm of the projected
    gradient drops below ``opts.tol``.

    Raises
    ------
    InfeasibleDensityError
        alpha is outside the feasible cone (carries a Farkas certificate).
    BoundaryDensityError
        alpha is on the boundary of the cone; some tile weights would vanish.
    ConvergenceError
        no convergence within ``opts.max_iter`` iterations.
    """
    opts = opts or SolverOptions()
    alpha = system.vector(alpha) if isinstance(alpha, dict) else np.asarray(alpha, dtype=float)
    _check_alpha(system, alpha, opts)

    _, cok, _ = real_kernels(system.incidence)
    flat = _flat_directions(system)
    # orthonormal basis Q of the complement of the flat directions
    Uf, _, _ = np.linalg.svd(np.eye(system.n_vertices) - flat @ flat.T)
    Q = Uf[:, : system.n_vertices - flat.shape[1]]

    X = np.zeros(system.n_vertices) if X0 is None else np.asarray(X0, dtype=float).copy()
    D = system.incidence.astype(float)

    def objective(Y):
        return log_tiling_polynomial(system, Y) - alpha @ Y

    G = objective(X)
    trace = [G]
    it = 0
    resid = np.inf
    while True:
        fe = free_energy(system, X)
        g = fe.gradient - alpha
        g = Q @ (Q.T @ g)
        resid = float(np.max(np.abs(g)))
        if resid <= opts.tol:
            break
        if it >= opts.max_iter:
            raise ConvergenceError(
                f"no convergence after {it} iterations (residual {resid:.3e})", resid, it
            )
        Hr = Q.T @ fe.hessian @ Q
        gr = Q.T @ g
        step_r = np.linalg.solve(Hr + opts.tikhonov * np.eye(Hr.shape[0]), -gr)
        step = Q @ step_r
        slope = float(g @ step)
        if resid < 1e-6:
            # objective differences are below roundoff here; accept a full
            # Newton step when it shrinks the projected gradient
            Xn = X + step
            gn = free_energy(system, Xn, hessian=False).gradient - alpha
            if float(np.max(np.abs(Q @ (Q.T @ gn)))) < resid:
                X, G = Xn, objective(Xn)
                trace.append(G)
                it += 1
                continue
        t = 1.0
        while True:
            Xn = X + t * step
            Gn = objective(Xn)
            if Gn <= G + opts.armijo * t * slope or t < 1e-12:
                break
            t *= 0.5
        if Gn > G:
            # roundoff level; accept the unchanged point and let the test decide
            Gn, Xn = G, X
            if resid < 100 * opts.tol:
                break
        X, G = Xn, Gn
        trace.append(G)
        it += 1

    X = _normalise(system, X, cok)
    _, p = _tile_probs(system, X)
    if np.any(p < opts.underflow):
        raise BoundaryDensityError(
            "critical weights underflow; density is numerically on the cone boundary",
            np.flatnonzero(p < opts.underflow).tolist(),
        )
    sigma = growth_rate(system, X, alpha)
    crit_resid = float(np.max(np.abs(D @ p - alpha)))
    log.debug("critical gauge: %d iterations, residual %.3e", it, crit_resid)
    return GaugeSolution(system, alpha, X, p, sigma, True, it, crit_resid, tuple(trace))


def growth_rate(system: TileSystem, X, alpha) -> float:
    """sigma = log P(x) - sum_v alpha_v log x_v."""
    X = np.asarray(X, dtype=float)
    return float(log_tiling_polynomial(system, X) - np.asarray(alpha, dtype=float) @ X)


def tile_probabilities(solution: GaugeSolution) -> np.ndarray:
    """Expected fraction of tiles of each type: the critical weights w'_t."""
    return solution.critical_weights.copy()


def _is_bipartite_dimer(system: TileSystem):
    """Two-colour the vertices if every tile is a two-vertex dimer; else None."""
    adj: dict[int, list[int]] = {i: [] for i in range(system.n_vertices)}
    for t in system.tiles:
        items = list(t.items())
        if len(items) != 2 or any(m != 1 for _, m in items):
            return None
        a, b = (system.index[v] for v, _ in items)
        adj[a].append(b)
        adj[b].append(a)
    colour = [-1] * system.n_vertices
    for s in range(system.n_vertices):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        stack = [s]
        while stack:
            a = stack.pop()
            for b in adj[a]:
                if colour[b] < 0:
                    colour[b] = 1 - colour[a]
                    stack.append(b)
                elif colour[b] == colour[a]:
                    return None
    return np.array(colour)


def solve_bipartite_dimer_gauge(
    system: TileSystem,
    alpha,
    opts: SolverOptions | None = None,
    *,
    white=None,
) -> GaugeSolution:
    """Critical gauge for a bipartite dimer system via the white-vertex equations.

    Black variables are eliminated through x_b = alpha_b / sum_w w_wb x_w;
    the remaining equations

        alpha_w = sum_b alpha_b w_wb x_w / sum_w' w_w'b x_w'

    are relaxed by alternating scaling and then polished by Newton in
    log x_w. ``white`` optionally fixes which colour class is white (a
    boolean mask in vertex order).
    """
    opts = opts or SolverOptions()
    colour = _is_bipartite_dimer(system)
    if colour is None:
        raise ValueError("system is not a bipartite dimer model")
    alpha = system.vector(alpha) if isinstance(alpha, dict) else np.asarray(alpha, dtype=float)
    _check_alpha(system, alpha, opts)
    is_white = (colour == 0) if white is None else np.asarray(white, dtype=bool)
    W = np.flatnonzero(is_white)
    B = np.flatnonzero(~is_white)
    wpos = {v: i for i, v in enumerate(W)}
    bpos = {v: i for i, v in enumerate(B)}
    A = np.zeros((len(W), len(B)))
    edge_wb = []
    for t, w in zip(system.tiles, system.weights):
        a, b = (system.index[v] for v, _ in t.items())
        if not is_white[a]:
            a, b = b, a
        A[wpos[a], bpos[b]] += float(w)
        edge_wb.append((wpos[a], bpos[b]))
    aw, ab = alpha[W], alpha[B]

    Y = np.zeros(len(W))  # log x_w

    def black_sums(Y):
        return A.T @ np.exp(Y)

    def residual(Y):
        S = black_sums(Y)
        q = A * np.exp(Y)[:, None] / S[None, :]
        return q @ ab - aw, q

    # alternating scaling to get close
    for _ in range(20000):
        r, q = residual(Y)
        if np.max(np.abs(r)) < 1e-6:
            break
        Y = Y + np.log(aw) - np.log(q @ ab)
    it = 0
    while True:
        r, q = residual(Y)
        resid = float(np.max(np.abs(r)))
        if resid <= opts.tol:
            break
        if it >= opts.max_iter:
            raise ConvergenceError(f"bipartite solve stalled (residual {resid:.3e})", resid, it)
        Qa = q * ab[None, :]
        J = np.diag(Qa.sum(axis=1)) - Qa @ q.T
        step, *_ = np.linalg.lstsq(J, -r, rcond=1e-12)
        Y = Y + step
        it += 1

    xw = np.exp(Y)
    xb = ab / (A.T @ xw)
    X = np.empty(system.n_vertices)
    X[W] = Y
    X[B] = np.log(xb)
    _, cok, _ = real_kernels(system.incidence)
    X = _normalise(system, X, cok)
    _, p = _tile_probs(system, X)
    D = system.incidence.astype(float)
    crit_resid = float(np.max(np.abs(D @ p - alpha)))
    return GaugeSolution(system, alpha, X, p, growth_rate(system, X, alpha), True, it, crit_resid)
