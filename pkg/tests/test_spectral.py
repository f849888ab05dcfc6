import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multitile.spectral import (
    BARS3,
    KEY_POLYOMINO,
    L_TRIOMINO,
    PLUS_POLYOMINO,
    PRODUCT_POLYOMINO,
    QUASIPERIODIC_1D,
    SQUARE_POLYOMINO,
    WEIGHTED_TILE,
    LaurentPolynomial,
    PoleError,
    SpectralModel,
    asymptotic_covariance,
    covariance_dft,
    covariance_grid,
    covariance_heatmap,
    find_torus_roots,
    integer_relation,
    symbol_eigenvalue,
    transversality_margin,
    variance_log_estimate,
)

OMEGA = cmath.exp(2j * math.pi / 3)


def near_offsets(lo=3, hi=8):
    return [(s, t) for s in range(-hi, hi + 1) for t in range(-hi, hi + 1) if lo <= abs(s) + abs(t) <= hi]


# ---------------------------------------------------------------- symbols


def test_symbol_eigenvalue_examples():
    m = SpectralModel.single(L_TRIOMINO, 9, 0.5)
    assert symbol_eigenvalue(m, (1, 1)) == pytest.approx(9.5)
    assert symbol_eigenvalue(m, (OMEGA, OMEGA**2)) == pytest.approx(0.5, abs=1e-12)
    m1 = SpectralModel.single(BARS3, 6, 0.0)
    assert symbol_eigenvalue(m1, (-1,)) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        symbol_eigenvalue(m, (2, 1))
    with pytest.raises(ValueError):
        symbol_eigenvalue(m, (1,))


@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), st.floats(0, 1))
def test_symbol_eigenvalue_is_shifted_modulus(a, b, eps):
    m = SpectralModel.single(WEIGHTED_TILE, 8, eps)
    z = (cmath.exp(1j * a), cmath.exp(1j * b))
    assert symbol_eigenvalue(m, z) == pytest.approx(eps + abs(WEIGHTED_TILE(*z)) ** 2, rel=1e-12, abs=1e-12)


def test_laurent_product_and_grid():
    f = LaurentPolynomial.from_cells([(0, 0), (1, 0), (3, 0)])
    g2 = LaurentPolynomial.from_cells([(0, 0), (0, 2)])
    z = (cmath.exp(0.3j), cmath.exp(1.1j))
    assert (f * g2)(*z) == pytest.approx(f(*z) * g2(*z))
    assert len((f * g2).coefficients) == 6
    g = L_TRIOMINO.on_grid(6)
    k = 2 * math.pi / 6
    assert g[1, 2] == pytest.approx(L_TRIOMINO(cmath.exp(1j * k), cmath.exp(2j * k)))


# ---------------------------------------------------------------- DFT covariance


@pytest.mark.parametrize("p,n,eps", [(L_TRIOMINO, 12, 0.1), (KEY_POLYOMINO, 10, 0.05), (BARS3, 30, 0.02), (QUASIPERIODIC_1D, 25, 0.3)])
def test_fft_matches_compensated_sum(p, n, eps):
    m = SpectralModel.single(p, n, eps)
    grid = covariance_grid(m)
    offs = list(np.ndindex(*grid.shape))[:: max(1, len(grid.flat) // 40)]
    arg = [o[0] for o in offs] if m.d == 1 else offs
    np.testing.assert_allclose(covariance_dft(m, arg), [grid[o] for o in offs], rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("p", [L_TRIOMINO, KEY_POLYOMINO, WEIGHTED_TILE])
def test_covariance_even_and_mean_free(p):
    grid = covariance_grid(SpectralModel.single(p, 16, 0.01))
    np.testing.assert_allclose(grid, np.roll(grid[::-1, ::-1], 1, axis=(0, 1)), atol=1e-12)
    # the zero character is excluded, so covariances sum to zero over the torus
    assert abs(grid.sum()) < 1e-9 * np.abs(grid).max()


def test_l_triomino_without_lattice_roots_is_rigid():
    # 3 does not divide n: no zero modes, and eps * Cov -> 0 as eps -> 0
    vals = [e * abs(covariance_dft(SpectralModel.single(L_TRIOMINO, 10, e), (0, 0))) for e in (1e-2, 1e-4, 1e-6)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-5
    crystal = covariance_grid(SpectralModel.single(L_TRIOMINO, 10, 0.0), zero_modes="project")
    assert np.abs(crystal).max() == 0.0


def test_pole_error_and_projection():
    m = SpectralModel.single(L_TRIOMINO, 9, 0.0)
    with pytest.raises(PoleError):
        covariance_grid(m)
    with pytest.raises(PoleError):
        covariance_dft(m, (1, 0))
    crystal = covariance_grid(m, zero_modes="project")
    # two lattice roots (w, w^2) and conjugate: n^-2 * 2 cos(2 pi (s - t)/3)
    s, t = np.meshgrid(np.arange(9), np.arange(9), indexing="ij")
    np.testing.assert_allclose(crystal, 2 * np.cos(2 * np.pi * (s - t) / 3) / 81, atol=1e-14)
    with pytest.raises(ValueError):
        covariance_grid(m, zero_modes="ignore")


def test_heatmap_orientation():
    m = SpectralModel.single(KEY_POLYOMINO, 32, 0.01)
    hm = covariance_heatmap(m, window=9)
    grid = covariance_grid(m)
    assert hm.values.shape == (9, 9) and hm.half == 4 and hm.normalisation == "K*w0"
    for s, t in [(0, 0), (3, -1), (-2, 4), (1, 2)]:
        assert hm.values[t + 4, s + 4] == pytest.approx(grid[s % 32, t % 32])
    with pytest.raises(ValueError):
        covariance_heatmap(m, window=33)
    one_d = covariance_heatmap(SpectralModel.single(BARS3, 20, 0.1), window=5)
    assert one_d.values.shape == (1, 5)


# ---------------------------------------------------------------- roots


def test_quasiperiodic_roots():
    rep = find_torus_roots(QUASIPERIODIC_1D)
    assert rep.verdict == "POINTS" and rep.all_simple and len(rep.roots) == 2
    ang = sorted(r.angles[0] for r in rep.roots)
    # 2 cos(theta) = -1/4 ... roots of 2z^2 + z + 2
    assert math.cos(ang[0]) == pytest.approx(-0.25)
    assert integer_relation([ang[0]], max_coeff=50) is None


def test_bars3_roots_are_cube_roots_of_unity():
    rep = find_torus_roots(BARS3)
    assert sorted(round(r.angles[0] / math.pi, 9) for r in rep.roots) == [pytest.approx(2 / 3), pytest.approx(4 / 3)]
    assert integer_relation([rep.roots[0].angles[0]]) in ((3,), (-3,))


def test_product_has_no_roots():
    assert find_torus_roots(PRODUCT_POLYOMINO).verdict == "NO_ROOTS"


def test_plus_has_root_curves():
    rep = find_torus_roots(PLUS_POLYOMINO)
    assert rep.verdict == "CURVE" and rep.curves and not rep.all_simple
    for curve in rep.curves:
        a, b = np.asarray(curve).T
        assert np.abs(1 + 2 * np.cos(a) + 2 * np.cos(b)).max() < 1e-6
    with pytest.raises(ValueError):
        variance_log_estimate(PLUS_POLYOMINO, 1e-3)


def test_square_is_non_transversal():
    rep = find_torus_roots(SQUARE_POLYOMINO)
    assert any(r.kind == "NON_TRANSVERSAL" for r in rep.roots)
    assert not rep.all_simple


def test_l_triomino_roots():
    rep = find_torus_roots(L_TRIOMINO)
    assert rep.all_simple and len(rep.roots) == 2
    pts = sorted((round(r.angles[0] / math.pi, 9), round(r.angles[1] / math.pi, 9)) for r in rep.roots)
    assert pts[0] == (pytest.approx(2 / 3), pytest.approx(4 / 3))
    assert pts[1] == (pytest.approx(4 / 3), pytest.approx(2 / 3))
    for r in rep.roots:
        assert r.margin == pytest.approx(math.sqrt(3) / 2)


@pytest.mark.parametrize("p,relation", [(WEIGHTED_TILE, True), (KEY_POLYOMINO, False)])
def test_two_simple_roots_and_relations(p, relation):
    rep = find_torus_roots(p)
    assert rep.all_simple and len(rep.roots) == 2
    for r in rep.roots:
        assert abs(p(*r.point)) < 1e-10
    assert (integer_relation(rep.roots[0].angles) is not None) == relation


def test_transversality_margin():
    assert transversality_margin(1, 1j) == pytest.approx(1.0)
    assert transversality_margin(1 + 1j, 2 + 2j) == pytest.approx(0.0)
    assert transversality_margin(0, 1) == 0.0
    assert transversality_margin(1, cmath.exp(1j * math.pi / 6)) == pytest.approx(0.5)


# ---------------------------------------------------------------- asymptotics


def asym_minus_dft(p, eps, n=512):
    m = SpectralModel.single(p, n, eps)
    rep = find_torus_roots(p)
    offs = near_offsets()
    grid = covariance_grid(m)
    dft = np.array([grid[s % n, t % n] for s, t in offs])
    return np.array([asymptotic_covariance(p, eps, o, report=rep) for o in offs]) - dft


@pytest.mark.parametrize("p,tol", [(L_TRIOMINO, 0.005), (WEIGHTED_TILE, 0.002), (KEY_POLYOMINO, 0.01)])
def test_asymptotic_error_is_stable_in_eps(p, tol):
    # the remainder is an O(1) function of the offset, not a growing error
    d1, d2 = asym_minus_dft(p, 1e-2), asym_minus_dft(p, 1e-3)
    assert np.abs(d1 - d2).max() < tol


def test_l_triomino_sign_pattern():
    m = SpectralModel.single(L_TRIOMINO, 256, 1e-3)
    for s, t in near_offsets(2, 6):
        c = covariance_dft(m, (s, t))
        assert np.sign(c) == (1 if (s - t) % 3 == 0 else -1)


def test_l_triomino_variance_constant():
    for eps in (1e-2, 1e-3, 1e-4):
        v = covariance_dft(SpectralModel.single(L_TRIOMINO, 1024, eps), (0, 0))
        est = variance_log_estimate(L_TRIOMINO, eps)
        assert est.coefficient == pytest.approx(1 / (math.pi * math.sqrt(3)))
        assert abs(v - est.value) < 0.005


@pytest.mark.parametrize("p,n,eps_pair,tol", [
    (L_TRIOMINO, 512, (1e-2, 1e-3), 0.03),
    (WEIGHTED_TILE, 512, (1e-2, 1e-3), 0.03),
    (KEY_POLYOMINO, 4096, (1e-3, 1e-4), 0.03),
])
def test_variance_log_slope(p, n, eps_pair, tol):
    a, b = eps_pair
    va, vb = (covariance_dft(SpectralModel.single(p, n, e), (0, 0)) for e in eps_pair)
    slope = (vb - va) / math.log(a / b)
    assert slope == pytest.approx(variance_log_estimate(p, a).coefficient, rel=tol)


def test_bars3_one_dimensional_asymptotics():
    eps, n = 1e-3, 1200
    m = SpectralModel.single(BARS3, n, eps)
    offs = list(range(1, 40))
    dft = covariance_dft(m, offs)
    asym = np.array([asymptotic_covariance(BARS3, eps, s) for s in offs])
    assert np.max(np.abs(asym - dft) / np.abs(dft)) < 0.03


def test_quasiperiodic_one_dimensional_asymptotics():
    eps, n = 1e-3, 4000
    m = SpectralModel.single(QUASIPERIODIC_1D, n, eps)
    offs = [0, 1, 2, 5, 10, 30, 100]
    dft = covariance_dft(m, offs)
    asym = np.array([asymptotic_covariance(QUASIPERIODIC_1D, eps, s) for s in offs])
    scale = 1 / (2 * math.sqrt(eps * abs(find_torus_roots(QUASIPERIODIC_1D).roots[0].gradient[0]) ** 2))
    assert np.max(np.abs(asym - dft)) < 0.05 * scale


def test_bars3_finite_size_coth_law():
    # at eps = beta/n^2 the two cube-root modes give eps n Cov(s) -> 2 cos(2 pi s/3) x coth x
    n = 300
    for beta in (1.0, 4.0):
        m = SpectralModel.single(BARS3, n, beta / n**2)
        x = math.sqrt(beta) / (2 * math.sqrt(3))
        for s in range(4):
            v = covariance_dft(m, s) * m.eps * n / (2 * math.cos(2 * math.pi * s / 3))
            assert v == pytest.approx(x / math.tanh(x), rel=0.01)


# ---------------------------------------------------------------- non-simple shapes


def harmonic_odd(m):
    return sum(1 / (2 * k - 1) for k in range(1, abs(m) + 1))


def square_bracket(eps, n, offsets):
    m = SpectralModel.single(SQUARE_POLYOMINO, n, eps)
    c = covariance_dft(m, offsets)
    sign = np.array([(-1) ** (s + t) for s, t in offsets])
    return 2 * math.pi * math.sqrt(eps) * sign * c - math.log(16 / math.sqrt(eps))


def test_square_closed_form_on_axes():
    offs = [(0, 0), (1, 0), (2, 0), (3, 0), (0, 2)]
    got = square_bracket(1e-3, 1024, offs)
    want = [-2 * harmonic_odd(s) - 2 * harmonic_odd(t) for s, t in offs]
    np.testing.assert_allclose(got, want, atol=0.02)


def test_square_closed_form_off_axis_converges():
    offs = [(1, 1), (2, 1), (3, 3)]
    want = np.array([-2 * harmonic_odd(s) - 2 * harmonic_odd(t) for s, t in offs])
    err = [np.abs(square_bracket(e, n, offs) - want).max() for e, n in ((1e-2, 512), (1e-3, 1024), (1e-4, 2048))]
    assert err[0] > err[1] > err[2] and err[2] < 0.15


def test_plus_decays_slowly_product_decays_fast():
    plus = covariance_grid(SpectralModel.single(PLUS_POLYOMINO, 512, 1e-4))
    prod = covariance_grid(SpectralModel.single(PRODUCT_POLYOMINO, 64, 0.0))

    def ring_max(grid, r):
        n = grid.shape[0]
        return max(abs(grid[s % n, (r - abs(s)) % n]) for s in range(-r, r + 1))

    p_ratio = ring_max(plus, 32) / ring_max(plus, 4)
    q_ratio = ring_max(prod, 16) / ring_max(prod, 2)
    assert p_ratio > 0.1  # power-law-like
    assert q_ratio < 0.1  # exponential
