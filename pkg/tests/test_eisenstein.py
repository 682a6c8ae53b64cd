import math

import pytest

from qlat.errors import DomainError
from qlat.eisenstein_series import (a_of_m, bprime_ratio, chi_d0, coefficient_scale, local_counts, lp_polynomial,
                                    sigma_m, weight)


def test_weight_and_scale(L5):
    assert weight(L5) == 2.5
    assert coefficient_scale(L5) == pytest.approx(52.6379, rel=1e-5)


def test_lp_polynomial_example(L5):
    L = lp_polynomial(L5, 3, 3)
    assert L.coeffs == (1, 0, -81)
    N = local_counts(L5, 3, 3, 2)
    # the polynomial is built from counts: N(p^w) t^w + (1 - p^(r-1) t) sum_{n<w} N(p^n) t^n
    t = 0.37
    direct = N[2] * t**2 + (1 - 81 * t) * (N[0] + N[1] * t)
    assert L(t) == pytest.approx(direct)


def test_character(L5):
    assert chi_d0(L5, 1, 3) == -1
    assert chi_d0(L5, 1, 5) == 1
    assert chi_d0(L5, 1, 2) == 0


def test_sigma_regression(L5):
    s1 = sigma_m(L5, 1, 1)
    assert s1.d == -4
    assert s1.value_at_k == pytest.approx(7 / 6, rel=1e-9)
    assert s1.logderiv_at_k == pytest.approx(-0.231049060187, rel=1e-9)
    s36 = sigma_m(L5, 1, 36)
    assert s36.value_at_k == pytest.approx(1.32619598765, rel=1e-9)
    assert s36.logderiv_at_k == pytest.approx(-0.40908698157, rel=1e-9)


def test_sigma_logderiv_numerically(L5):
    # the log-derivative must be the derivative of the log of the product in s
    from qlat.arith import kronecker, prime_factors

    def sig(s, m=36):
        r = L5.rank
        total = 1.0
        for p in prime_factors(2 * m * L5.det):
            L = lp_polynomial(L5, p, m)
            chi = kronecker(-4, p)
            f = (1 - chi * p ** (0.5 - s)) / (1 - p ** (1 - 2 * s)) * L(p ** (1 - r / 2 - s))
            total *= f
        return total

    k = weight(L5)
    h = 1e-5
    num = (math.log(sig(k + h)) - math.log(sig(k - h))) / (2 * h)
    assert sig(k) == pytest.approx(sigma_m(L5, 1, 36).value_at_k, rel=1e-12)
    assert num == pytest.approx(sigma_m(L5, 1, 36).logderiv_at_k, rel=1e-6)


def test_square_class_enforced(L5):
    with pytest.raises(DomainError):
        sigma_m(L5, 1, 2)


def test_a_of_m(L5):
    est = a_of_m(L5, 36)
    assert est.a_value == pytest.approx(260.744, rel=1e-5)
    assert est.c_value == pytest.approx(-2 * coefficient_scale(L5) * est.a_value)
    assert est.trunc_error > 0


def test_bprime_ratio(L5):
    assert bprime_ratio(L5, 1, 36, 0.5) == pytest.approx(math.log(36) + 2 * -0.40908698157 + 0.5, rel=1e-9)
