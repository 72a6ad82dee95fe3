import numpy as np
import pytest
from hypothesis import given, strategies as st

from facloc.covering import Covering, candidate_lengths, fit_bounded, greedy_cover, min_cover
from facloc.verify import brute_force_cover_length

points = st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=8)


def test_greedy_examples():
    assert greedy_cover((0, 1, 2), 1) == (0, 2)
    assert greedy_cover((0, 1, 2), 2) == (0,)
    assert greedy_cover((5,), 0) == (5,)
    with pytest.raises(ValueError):
        greedy_cover((), 1)


def test_min_cover_examples():
    assert min_cover((0, 1, 2), 2) == Covering(1.0, (0.0, 2.0))
    assert min_cover((0, 10), 2) == Covering(0.0, (0.0, 10.0))
    assert min_cover((0, 10), 1) == Covering(10.0, (0.0,))
    with pytest.raises(ValueError):
        min_cover((0, 1), 0)


def test_duplicates_do_not_change_covering():
    assert min_cover((0, 0, 1, 1, 5), 2) == min_cover((0, 1, 5), 2)
    assert min_cover((3, 3, 3), 1) == Covering(0.0, (3.0,))


@given(points, st.integers(1, 5))
def test_min_cover_is_minimal_and_valid(xs, k):
    cov = min_cover(xs, k)
    assert cov.count <= k
    assert all(cov.covers(x) for x in xs)
    s = cov.starts
    assert all(b >= a + cov.length for a, b in zip(s, s[1:]))
    assert cov.length == brute_force_cover_length(xs, k)
    assert cov.length in candidate_lengths(xs)


@given(points, st.floats(0, 50), st.floats(0, 50))
def test_greedy_count_nonincreasing(xs, a, b):
    xs = sorted(xs)
    lo, hi = min(a, b), max(a, b)
    assert len(greedy_cover(xs, hi)) <= len(greedy_cover(xs, lo))


@pytest.mark.parametrize("starts, ell, L, expect", [
    ((9.0,), 2.0, 10.0, (8.0,)),
    ((0.0, 5.0), 1.0, 10.0, (0.0, 5.0)),
    ((3.0, 6.0), 3.0, 8.0, (2.0, 5.0)),
])
def test_fit_bounded_examples(starts, ell, L, expect):
    assert fit_bounded(Covering(ell, starts), L).starts == expect


def test_fit_bounded_rejects_outside():
    with pytest.raises(ValueError, match=r"location outside \[0,L\]"):
        fit_bounded(Covering(1.0, (0.0,)), 5.0, locations=(0.5, 7.0))


def bounded_fit_properties(cov, fitted, xs, L):
    ell = cov.length
    s = fitted.starts
    inside = all(0 <= a and L - a >= ell for a in s)
    disjoint = all(b - a >= ell for a, b in zip(s, s[1:]))
    covered = all(fitted.covers(x) for x in xs)
    return inside, disjoint, covered


def test_fit_bounded_random(rng):
    for _ in range(1000):
        L = float(rng.uniform(1, 100))
        n = int(rng.integers(1, 10))
        k = int(rng.integers(1, 6))
        xs = rng.uniform(0, L, n)
        cov = min_cover(xs, k)
        fitted = fit_bounded(cov, L, xs)
        assert bounded_fit_properties(cov, fitted, xs, L) == (True, True, True)
