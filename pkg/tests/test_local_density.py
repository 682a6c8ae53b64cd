import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qlat.errors import DomainError
from qlat.lattice_core import diagonal, hyperbolic_plane, quadratic_diagonal
from qlat.local_density import (check_count_identity, classify_solutions, count_brute, mu_good_base, mu_p,
                                mu_p_explicit, mu_p_limit, singular_series, w_level)


def test_count_brute_examples(L5):
    assert count_brute(hyperbolic_plane(), 3, 1, 1) == 2
    assert count_brute(L5, 3, 1, 1) == 90
    box = sum(1 for v in itertools.product(range(3), repeat=5) if L5.Q(v) % 3 == 1)
    assert box == 90


def test_n_zero_is_one(L5):
    assert mu_p(L5, 5, 7, 0).value == 1


def test_classification_unit_form():
    q5 = quadratic_diagonal(1, 1, 1, 1, 1)
    assert classify_solutions(q5, 3, 2, 9) == (6480, 0, 243)


def test_p_not_dividing_m_all_good(L5):
    good, bad, zero = classify_solutions(L5, 3, 2, 4)
    assert bad == zero == 0 and good == count_brute(L5, 3, 2, 4)


def test_zero_part_needs_p_squared(L5):
    _, _, zero = classify_solutions(L5, 3, 2, 3)
    assert zero == 0


def test_good_base_examples(L5):
    assert mu_good_base(hyperbolic_plane(), 5, 1) == Fraction(4, 5)
    assert mu_good_base(L5, 2, 1) == Fraction(35, 32)
    good, _, _ = classify_solutions(L5, 2, 3, 1)
    assert Fraction(good, 2 ** (3 * 4)) == Fraction(35, 32)


def test_w_level():
    assert (w_level(3, 9), w_level(2, 6), w_level(5, 7)) == (3, 5, 1)


def test_limit_p2_m2(L5):
    lim = mu_p_limit(L5, 2, 2)
    assert lim.w == 5 and lim.value == Fraction(15, 16)
    assert lim.value == Fraction(count_brute(L5, 2, 5, 2), 2 ** (5 * 4))


@pytest.mark.parametrize("p", [3, 5, 7])
def test_explicit_matches_recursion(L5, p):
    for m in range(1, 60):
        for n in range(0, 5):
            assert mu_p_explicit(L5, p, m, n) == mu_p(L5, p, m, n).value


def test_parts_match_classification(L5):
    for p, m, n in ((2, 4, 3), (3, 9, 2), (3, 18, 3), (5, 25, 2)):
        dv = mu_p(L5, p, m, n)
        scale = p ** (n * (L5.rank - 1))
        assert tuple(x * scale for x in dv.parts) == classify_solutions(L5, p, n, m)


@settings(max_examples=40, deadline=None)
@given(p=st.sampled_from([2, 3, 5]), m=st.integers(1, 60), n=st.integers(1, 2))
def test_recursion_equals_brute_nonmaximal(p, m, n):
    lat = diagonal(2, -2).direct_sum(hyperbolic_plane()).direct_sum(hyperbolic_plane())
    assert mu_p(lat, p, m, n).value == Fraction(count_brute(lat, p, n, m), p ** (n * 5))


def test_stabilization(L5, U3):
    for lat in (L5, U3):
        for p in (2, 3, 5):
            for m in (1, 2, 4, 9, 12, 50):
                w = w_level(p, m)
                v = mu_p(lat, p, m, w).value
                assert mu_p(lat, p, m, w + 1).value == v == mu_p(lat, p, m, w + 2).value


def test_close_to_one_for_large_p(L5):
    # |mu_p - 1| <= C/p; here C = 1 already works at p >= 11
    for p in (11, 13, 17, 19, 23):
        for m in (1, 2, 3, 5, 6):
            assert abs(mu_p_limit(L5, p, m).value - 1) <= Fraction(1, p)


def test_count_identity_single_term(L5):
    # p not dividing 2 m det: w = 1 and the deviation is |1 - 1/mu_p(m,1)|
    for p, m in ((3, 1), (5, 2), (7, 3)):
        dev = check_count_identity(L5, p, m)
        assert dev == abs(1 - 1 / mu_p(L5, p, m, 1).value)


def test_singular_series_regression(L5):
    ss = singular_series(L5, 1, 100)
    assert ss.value == pytest.approx(1.327424290953142, rel=1e-12)
    assert ss.value > 0
    assert singular_series(L5, 1, 200).error_bound < ss.error_bound


def test_singular_series_within_bound(L5):
    lo = singular_series(L5, 6, 100)
    hi = singular_series(L5, 6, 1000)
    assert abs(hi.value - lo.value) <= lo.error_bound * lo.value


def test_unknown_method(L5):
    with pytest.raises(DomainError):
        mu_p(L5, 3, 1, 1, method="magic")
