import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from multitile import DUMMY_VERTEX, Tile, TileSystem, apply_gauge, eval_tiling_polynomial, exact_distribution, homogenize
from multitile.fixtures import cycle_dimers, cyclic_bars, path_with_singletons
from multitile.model import log_tiling_polynomial
from multitile.oracle import partition_function


def test_tile_validation():
    with pytest.raises(ValueError):
        Tile({})
    with pytest.raises(ValueError):
        Tile({"a": -1})
    assert Tile({"a": 0, "b": 2}).multiplicities == (("b", 2),)
    assert Tile.from_vertices("aab")["a"] == 2


def test_system_validation():
    with pytest.raises(ValueError, match="unknown vertex 'c'"):
        TileSystem(["a", "b"], [{"a": 1, "c": 1}])
    with pytest.raises(ValueError, match="non-positive weight"):
        TileSystem(["a", "b"], [{"a": 1, "b": 1}], [0])
    with pytest.raises(ValueError, match="duplicate"):
        TileSystem(["a", "a"], [{"a": 1}])


def test_incidence_examples():
    assert cyclic_bars(3).incidence.tolist() == [[1], [1], [1]]
    D = cyclic_bars(6).incidence
    for t in range(6):
        rows = sorted(np.flatnonzero(D[:, t]))
        assert len(rows) == 3 and all(D[r, t] == 1 for r in rows)
        assert any(sorted((i + k) % 6 for k in range(3)) == rows for i in range(6))
    P = path_with_singletons(5)
    assert P.incidence.shape == (6, 9)
    assert P.vertices[-1] == DUMMY_VERTEX
    # singleton columns carry one dummy copy, domino columns none
    assert P.incidence[-1].tolist() == [1] * 5 + [0] * 4
    assert P.is_uniform and P.delta == 2


def test_padding_with_repeated_dummy():
    S = TileSystem(["a", "b", "c"], [{"a": 1, "b": 1, "c": 1}, {"a": 1}])
    H = homogenize(S)
    assert Tile({"a": 1, DUMMY_VERTEX: 2}) in H.tiles
    # the padded monomial is x_a x0^2 / 2!; the 1/2! lives in the monomial, not the weight
    assert H.weights == S.weights
    for N in ([1, 1, 1], [2, 1, 1], [3, 1, 1], [4, 2, 2]):
        singles = N[0] - N[1]
        z = partition_function(S, N)
        zh = partition_function(H, N + [2 * singles])
        # each of the `singles` lifts picks 2 dummy copies: (2s)!/(2!)^s extra labellings
        extra = Fraction(math.factorial(2 * singles), 2**singles)
        assert zh == z * extra, N


def test_homogenize_identity_on_uniform():
    S = cycle_dimers(4)
    assert homogenize(S) == S


def test_polynomial_examples():
    c4 = cycle_dimers(4)
    assert eval_tiling_polynomial(c4, [1, 1, 1, 1]) == 4
    assert eval_tiling_polynomial(c4, [1, 2, 3, 4]) == pytest.approx((1 + 3) * (2 + 4), rel=1e-14)
    assert eval_tiling_polynomial(cyclic_bars(3), [1.5] * 3) == pytest.approx(1.5**3, rel=1e-14)
    X = np.log([1.0, 2.0, 3.0, 4.0])
    assert log_tiling_polynomial(c4, X) == pytest.approx(np.log(24.0), rel=1e-14)


def test_gauge_examples():
    c4 = cycle_dimers(4)
    assert apply_gauge(c4, [1, 1, 1, 1]).weights == c4.weights
    t = Fraction(7, 3)
    assert apply_gauge(c4, [t, 1 / t, t, 1 / t]).weights == (1, 1, 1, 1)
    assert apply_gauge(cyclic_bars(3), [2, 2, 2]).weights == (8,)


positive = st.floats(0.2, 5.0)


@given(st.lists(positive, min_size=6, max_size=6), st.lists(positive, min_size=6, max_size=6))
def test_gauge_composition(f, g):
    S = cyclic_bars(6)
    lhs = apply_gauge(apply_gauge(S, f), g).weights_array()
    rhs = apply_gauge(S, [a * b for a, b in zip(f, g)]).weights_array()
    np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


@given(st.lists(positive, min_size=6, max_size=6), st.lists(positive, min_size=6, max_size=6))
def test_gauge_acts_on_arguments(f, x):
    S = path_with_singletons(5)
    fx = [a * b for a, b in zip(f, x)]
    assert eval_tiling_polynomial(apply_gauge(S, f), x) == pytest.approx(eval_tiling_polynomial(S, fx), rel=1e-12)


rational = st.fractions(min_value=Fraction(1, 5), max_value=5, max_denominator=7).filter(lambda q: q > 0)


@given(st.lists(rational, min_size=4, max_size=4), st.lists(rational, min_size=4, max_size=4), st.integers(1, 3))
def test_gauge_invariance_of_exact_law(w, f, m):
    S = cycle_dimers(4).with_weights(w)
    law = exact_distribution(S, [m] * 4)
    gauged = exact_distribution(apply_gauge(S, f), [m] * 4)
    assert law.vectors == gauged.vectors
    assert law.probabilities == gauged.probabilities
