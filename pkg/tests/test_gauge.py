import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import minimize

from multitile import (
    BoundaryDensityError,
    ConvergenceError,
    InfeasibleDensityError,
    SolverOptions,
    apply_gauge,
    free_energy,
    partition_function,
    solve_bipartite_dimer_gauge,
    solve_critical_gauge,
)
from multitile.fixtures import (
    aztec_caption_weights,
    aztec_diamond,
    cycle_dimers,
    cyclic_bars,
    honeycomb,
    path_with_singletons,
    slab_level,
    slab_torus,
)
from multitile.model import log_tiling_polynomial
from multitile.selftest import path_probabilities


def h(p):
    return -p * math.log(p) - (1 - p) * math.log(1 - p)


def test_free_energy_examples():
    fe = free_energy(cycle_dimers(4), np.zeros(4))
    assert fe.F == pytest.approx(math.log(4))
    # each vertex lies in two of the four equally likely dimers
    np.testing.assert_allclose(fe.gradient, 0.5)
    fe = free_energy(cyclic_bars(3), np.zeros(3))
    assert fe.F == pytest.approx(0.0)
    np.testing.assert_allclose(fe.gradient, 1.0)


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
def test_gradient_and_hessian_match_finite_differences(X):
    S = path_with_singletons(5)
    X = np.array(X)
    fe = free_energy(S, X)
    step = 1e-5
    E = np.eye(6)
    fd = np.array([(free_energy(S, X + step * e, hessian=False).F - free_energy(S, X - step * e, hessian=False).F) / (2 * step) for e in E])
    np.testing.assert_allclose(fe.gradient, fd, atol=1e-6)
    fdh = np.array([(free_energy(S, X + step * e, hessian=False).gradient - free_energy(S, X - step * e, hessian=False).gradient) / (2 * step) for e in E])
    np.testing.assert_allclose(fe.hessian, fdh, atol=1e-6)


@pytest.mark.parametrize("a", [0.22, 0.25, 0.30, 0.21, 1 / 3 - 0.01])
def test_path_closed_forms(a):
    S = path_with_singletons(5)
    sol = solve_critical_gauge(S, [a] * 5 + [2 - 5 * a])
    ref = path_probabilities(a)
    labels = ["01", "02", "03", "04", "05", "12", "23", "34", "45"]
    np.testing.assert_allclose(sol.critical_weights, [ref[k] for k in labels], atol=1e-9)
    if a == 0.25:
        assert sol.critical_weights[1] == pytest.approx(1 / 8, abs=1e-12)


@given(st.floats(0.02, 0.98), st.floats(0.02, 0.98))
def test_c4_entropy_and_probabilities(a1, a2):
    sol = solve_critical_gauge(cycle_dimers(4), [a1, a2, 1 - a1, 1 - a2])
    assert sol.sigma == pytest.approx(h(a1) + h(a2), abs=1e-8)
    x1, x2, x3, x4 = sol.x
    np.testing.assert_allclose(sol.critical_weights, [x1 * x2, x2 * x3, x3 * x4, x1 * x4], rtol=1e-9)
    assert x1 / (x1 + x3) == pytest.approx(a1, abs=1e-9)
    assert x2 / (x2 + x4) == pytest.approx(a2, abs=1e-9)


def test_c4_spec_point():
    sol = solve_critical_gauge(cycle_dimers(4), [0.3, 0.5, 0.7, 0.5])
    assert sol.sigma == pytest.approx(h(0.3) + h(0.5), abs=1e-10)


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_aztec_caption_weights(k):
    S = aztec_diamond(k)
    alpha = [2 / S.n_vertices] * S.n_vertices
    for solver in (solve_critical_gauge, solve_bipartite_dimer_gauge):
        sol = solver(S, alpha)
        np.testing.assert_allclose(sol.critical_weights * k * (k + 1), aztec_caption_weights(k), atol=1e-8)


def test_bipartite_solver_agrees_on_honeycomb():
    S = honeycomb(4)
    alpha = [2 / S.n_vertices] * S.n_vertices
    a = solve_critical_gauge(S, alpha)
    b = solve_bipartite_dimer_gauge(S, alpha)
    np.testing.assert_allclose(a.critical_weights, b.critical_weights, atol=1e-9)
    assert a.sigma == pytest.approx(b.sigma, abs=1e-9)


def test_bipartite_solver_rejects_non_dimers():
    with pytest.raises(ValueError):
        solve_bipartite_dimer_gauge(cyclic_bars(6), [0.5] * 6)


def test_honeycomb_infinite_solution_identity():
    """x_ij = (i+j)! C(i+j, i) solves the three-term white-vertex equations."""

    def x(i, j):
        if i < 0 or j < 0:
            return 0
        return math.factorial(i + j) * math.comb(i + j, i)

    for i in range(12):
        for j in range(12):
            if (i, j) == (0, 0):
                continue  # the source of the flow; its horizontal edge carries nothing
            c = x(i, j)
            lhs = (Fraction(c, c + x(i - 1, j) + x(i, j - 1))
                   + Fraction(c, c + x(i + 1, j) + x(i + 1, j - 1))
                   + Fraction(c, c + x(i, j + 1) + x(i - 1, j + 1)))
            assert lhs == 1, (i, j)
    # edge probabilities of the solution form a unit flow out of every white vertex
    for i in range(8):
        for j in range(8):
            s = i + j
            out = Fraction(s, s + 1) + Fraction(j + 1, (s + 1) * (s + 2)) + Fraction(i + 1, (s + 1) * (s + 2))
            assert out == 1


def test_honeycomb_finite_criticality():
    S = honeycomb(3)
    sol = solve_critical_gauge(S, [2 / S.n_vertices] * S.n_vertices)
    assert np.abs(S.incidence @ sol.critical_weights - sol.alpha).max() <= 1e-9


@pytest.mark.parametrize("n", [2, 4])
def test_slab_gauge_is_critical(n):
    """Edge weights n - L (up from white level L) and L (down) are critical
    when the white/black density ratio is n/(n+2)."""
    S = slab_torus(n, m=4)
    levels = np.array([slab_level(v) for v in S.vertices])
    white = levels % 2 == 0
    raw = np.where(white, n, n + 2).astype(float)
    alpha = 2 * raw / raw.sum()
    pred = []
    for a, b in S.edges:
        La, Lb = slab_level(a), slab_level(b)
        Lw = La if La % 2 == 0 else Lb
        Lbk = Lb if Lw == La else La
        pred.append(n - Lw if Lbk == Lw + 1 else Lw)
    pred = np.array(pred, dtype=float)
    # the stated gauge already sums to a constant multiple of alpha at every vertex
    sums = S.incidence @ pred
    np.testing.assert_allclose(sums / alpha, (sums / alpha)[0], rtol=1e-12)
    sol = solve_critical_gauge(S, alpha)
    np.testing.assert_allclose(sol.critical_weights, pred / pred.sum(), atol=1e-9)


@given(st.lists(st.floats(-2, 2), min_size=6, max_size=6))
def test_uniqueness_up_to_gauge(X0):
    S = cyclic_bars(6).with_weights([1, 2, 3, 1, 0.5, 4])
    alpha = [0.4, 0.5, 0.6, 0.6, 0.5, 0.4]  # alpha_i + alpha_{i+3} constant: the real colorings
    a = solve_critical_gauge(S, alpha)
    b = solve_critical_gauge(S, alpha, X0=X0)
    np.testing.assert_allclose(a.critical_weights, b.critical_weights, atol=1e-8)


@given(st.lists(st.floats(0.3, 3.0), min_size=6, max_size=6))
def test_gauged_system_same_weights(f):
    S = path_with_singletons(5)
    alpha = np.array([0.25] * 5 + [0.75])
    a = solve_critical_gauge(S, alpha)
    b = solve_critical_gauge(apply_gauge(S, f), alpha)
    np.testing.assert_allclose(a.critical_weights, b.critical_weights, atol=1e-9)
    # P_f(x) = P(f x), so sigma shifts by alpha . log f
    assert b.sigma == pytest.approx(a.sigma + alpha @ np.log(f), abs=1e-9)


def test_objective_trace_is_monotone():
    S = aztec_diamond(4)
    sol = solve_critical_gauge(S, [2 / S.n_vertices] * S.n_vertices)
    trace = np.array(sol.objective_trace)
    assert (np.diff(trace) <= 1e-12 * np.abs(trace[:-1]).max()).all()


def test_duality_with_direct_minimisation():
    """sigma = min_X log P(e^X) - alpha . X, found by a derivative-free search."""
    S = cycle_dimers(4).with_weights([1.0, 2.0, 0.5, 3.0])
    alpha = np.array([0.3, 0.6, 0.7, 0.4])
    sol = solve_critical_gauge(S, alpha)

    def g(ab):  # the ker D* and constant directions are flat; fix X3 = X4 = 0
        X = np.array([ab[0], ab[1], 0.0, 0.0])
        return log_tiling_polynomial(S, X) - alpha @ X

    grid = np.linspace(-4, 4, 81)
    best = min(((g((a, b)), a, b) for a in grid for b in grid))
    res = minimize(g, best[1:], method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-14})
    assert res.fun == pytest.approx(sol.sigma, abs=1e-6)


def test_growth_rate_matches_oracle():
    """(1/K) log(K!/N! Z) approaches sigma for Z/6 bars with N = m."""
    S = cyclic_bars(6)
    sigma = solve_critical_gauge(S, [0.5] * 6).sigma
    gaps = []
    for m in (2, 4, 6):
        K = 2 * m
        Z = partition_function(S, [m] * 6)
        rate = (math.lgamma(K + 1) - 6 * math.lgamma(m + 1) + math.log(Z)) / K
        gaps.append(abs(rate - sigma))
    assert gaps[0] > gaps[1] > gaps[2]


def test_error_paths():
    with pytest.raises(InfeasibleDensityError) as info:
        solve_critical_gauge(path_with_singletons(5), [0.4] * 5 + [0.0])
    assert info.value.certificate is not None
    with pytest.raises(BoundaryDensityError):
        solve_critical_gauge(cycle_dimers(4), [1.0, 0.0, 0.0, 1.0])
    with pytest.raises(ConvergenceError):
        solve_critical_gauge(aztec_diamond(3), [1 / 12] * 24, SolverOptions(max_iter=1))
    with pytest.raises(InfeasibleDensityError):
        solve_critical_gauge(cycle_dimers(4), [0.5, 0.5, 0.5, 0.6])
