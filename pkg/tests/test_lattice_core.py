import itertools
from fractions import Fraction

import numpy as np
import pytest

from qlat.errors import DomainError, InvalidLatticeError
from qlat.lattice_core import (IntegralLattice, PeriodPoint, brute_force_box, diagonal, discriminant_group,
                               enumerate_representations, hyperbolic_plane, is_maximal_at, jordan_decompose,
                               project, quadratic_diagonal, successive_minima, theta_counts, vectors_up_to)


def test_odd_diagonal_rejected():
    with pytest.raises(InvalidLatticeError):
        IntegralLattice([[1, 0], [0, 2]])


def test_singular_rejected():
    with pytest.raises(InvalidLatticeError):
        IntegralLattice([[2, 2], [2, 2]])


def test_text_round_trip(L5):
    assert IntegralLattice.from_text(L5.to_text()) == L5


def test_corrupt_text():
    with pytest.raises(InvalidLatticeError):
        IntegralLattice.from_text("3\n2 0 0\n0 2\n")


def test_signatures(L5, U3):
    assert L5.signature == (3, 2) and L5.b == 3
    assert U3.signature == (3, 3)


def test_discriminant_groups(L5):
    assert discriminant_group(hyperbolic_plane()).order == 1
    g = discriminant_group(diagonal(2))
    assert g.elementary_divisors == (2,) and g.q_values == (Fraction(1, 4),)
    assert discriminant_group(L5).order == 2 == abs(L5.det)


def test_jordan_examples(L5):
    s = jordan_decompose(quadratic_diagonal(1, 3, 9), 3)
    assert s.valuations() == (0, 1, 2)
    u = jordan_decompose(hyperbolic_plane(), 2)
    assert [(bl.valuation, bl.dim) for bl in u.blocks] == [(0, 2)]
    assert jordan_decompose(L5, 3).valuations() == (0,) * 5


def test_maximality(L5, U3):
    assert is_maximal_at(L5, 2)
    nonmax = diagonal(2, -2).direct_sum(hyperbolic_plane()).direct_sum(hyperbolic_plane())
    assert not is_maximal_at(nonmax, 2)
    assert is_maximal_at(U3, 5)


def test_period_point_and_projection(L5, pt):
    qx, qp = project(pt, pt.u)
    assert qx == pytest.approx(-1) and qp == pytest.approx(0, abs=1e-12)
    rng = np.random.default_rng(3)
    for _ in range(20):
        lam = rng.integers(-5, 6, size=5)
        qx, qp = project(pt, lam)
        assert qx + qp == pytest.approx(L5.Q(lam), abs=1e-9)
        maj = pt.majorant().value(lam)
        assert maj == pytest.approx(qp - qx, abs=1e-9)


def test_period_point_rejects_positive_plane(L5):
    with pytest.raises(DomainError):
        PeriodPoint.from_vectors(L5, [1, 1, 0, 0, 0], [0, 0, 1, 1, 0])


def test_enumeration_matches_box(L5, pt):
    for m, T in ((1, 3.0), (2, 2.0), (5, 1.0)):
        got = enumerate_representations(L5, pt, m, T)
        assert np.abs(got).max() < 7
        box = brute_force_box(L5, pt, m, T, 7)
        assert np.array_equal(got, box)


def test_enumeration_monotone_and_empty(L5, pt):
    assert len(enumerate_representations(L5, pt, -3, 5.0)) == 0
    a = len(enumerate_representations(L5, pt, 6, 1.0))
    b = len(enumerate_representations(L5, pt, 6, 2.0))
    assert a <= b


def test_successive_minima_examples():
    mu, a, _ = successive_minima(quadratic_diagonal(1, 4))
    assert mu == (1.0, 2.0) and a == (1.0, 1.0, 2.0)
    mu, _, _ = successive_minima(quadratic_diagonal(1, 1, 1, 1, 1))
    assert mu == (1.0,) * 5


def test_minkowski_bounds_random():
    rng = np.random.default_rng(0)
    for _ in range(10):
        M = rng.integers(-3, 4, size=(4, 4))
        if round(np.linalg.det(M)) == 0:
            continue
        lat = IntegralLattice((2 * M.T @ M).tolist())
        mu, a, _ = successive_minima(lat)
        covol = (lat.det / 2**4) ** 0.5  # volume in the metric Q
        vol_ball = np.pi**2 / 2
        # Minkowski's second theorem: 2^r/r! covol <= vol_ball a_r <= 2^r covol
        assert 2**4 / 24 * covol <= vol_ball * a[-1] * (1 + 1e-9)
        assert vol_ball * a[-1] <= 2**4 * covol * (1 + 1e-9)


def test_theta_counts_against_box():
    lat = IntegralLattice([[2, 1, 0], [1, 4, 1], [0, 1, 6]])
    th = theta_counts(lat, 12)
    box = np.zeros(13, int)
    for v in itertools.product(range(-6, 7), repeat=3):
        q = lat.Q(v)
        if q <= 12:
            box[q] += 1
    assert np.array_equal(th, box)
    assert sum(1 for _, q in vectors_up_to(lat, 12)) == th[1:].sum()
