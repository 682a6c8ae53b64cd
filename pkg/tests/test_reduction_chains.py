import itertools
import numpy as np
import pytest
from sympy import Matrix
from sympy.matrices.normalforms import hermite_normal_form

from qlat.cli_harness.config import data_path
from qlat.errors import DomainError, GenericityViolationError, InvalidLatticeError, PrecisionError
from qlat.lattice_core import quadratic_diagonal, vectors_up_to
from qlat.reduction_chains import (ChainModel, chain_basis, chain_index, check_genericity, counts_below,
                                   density_disc_bound, ek_terms, expected_index, is_sublattice, level_counts,
                                   level_theta, level_window_counts, local_intersection, local_intersections,
                                   minima_profile, mu_infinity, random_base, square_class_set, summed_counts)

Z5 = quadratic_diagonal(1, 1, 1, 1, 1)


@pytest.fixture(scope="module")
def zero_model():
    return ChainModel.load(data_path("chain_zero.txt"))


@pytest.fixture(scope="module")
def generic_model():
    return ChainModel.load(data_path("chain_generic.txt"))


def test_text_round_trip(generic_model):
    again = ChainModel.from_text(generic_model.to_text())
    assert again == generic_model


def test_corrupt_text():
    with pytest.raises(InvalidLatticeError):
        ChainModel.from_text("5\n2 0 0 0 0\n")


def test_unsaturated_lambda_rejected():
    with pytest.raises(InvalidLatticeError):
        ChainModel(Z5, 3, 1, 1, ((3, 0, 0, 0, 0),), 1)


def test_hnf_against_sympy(generic_model):
    for k in (1, 2, 3):
        M = 3**k
        gens = [[x % M for x in g] for g in generic_model.Lambda]
        gens += [[M * int(i == j) for j in range(5)] for i in range(5)]
        ref = hermite_normal_form(Matrix(gens).T).T.tolist()
        ours = chain_basis(generic_model, generic_model.n0 + k)
        assert is_sublattice(ours, ref) and is_sublattice(ref, ours)


def test_zero_lambda_levels(zero_model):
    assert chain_basis(zero_model, 1) == tuple(tuple(int(i == j) for j in range(5)) for i in range(5))
    assert chain_basis(zero_model, 3) == tuple(tuple(25 * int(i == j) for j in range(5)) for i in range(5))
    prof = minima_profile(zero_model, 3)
    assert prof.mu == (25.0,) * 5


def test_zero_lambda_counts(zero_model):
    assert local_intersection(zero_model, 1) == 10
    # r5(25) on Z^5 plus r5(1) on 5 Z^5
    assert level_counts(zero_model, 25)[:2] == [(1, 1210), (2, 10)]
    assert local_intersection(zero_model, 25) == 1220


def test_local_intersection_generic():
    model = ChainModel.random(Z5, 5, 3, seed=1)
    assert local_intersection(model, 25) == 1270


def test_index_law_and_nesting():
    for seed in range(12):
        base = random_base(4, seed)
        s = seed % 4
        model = ChainModel.random(base, 3, s, e=1 + seed % 2, n0=1 + seed % 3, precision=12, seed=seed)
        prev = None
        for n in range(model.n0, model.n0 + 7):
            B = chain_basis(model, n)
            assert chain_index(model, n) == expected_index(model, n)
            if prev is not None:
                assert is_sublattice(B, prev)
            prev = B


def test_lambda_vectors_survive(generic_model):
    # every Lambda representative lies in every level inside the precision window
    for n in (1, 5, 20):
        assert is_sublattice([list(g) for g in generic_model.Lambda], chain_basis(generic_model, n))


def test_precision_error(generic_model):
    with pytest.raises(PrecisionError):
        chain_basis(generic_model, generic_model.n0 + generic_model.e * generic_model.precision + 1)


def test_genericity(generic_model):
    check_genericity(generic_model)
    bad = ChainModel(Z5, 3, 1, 1, ((1, 0, 0, 0, 0),), 1, precision=10)
    with pytest.raises(GenericityViolationError):
        check_genericity(bad, height=5)
    with pytest.raises(GenericityViolationError):
        local_intersection(bad, 1)


def test_genericity_oracle_small():
    # brute force over the height box agrees with the certificate
    model = ChainModel.random(quadratic_diagonal(1, 1, 1), 2, 1, precision=6, seed=4)
    M = 2**6
    g = model.Lambda[0]
    H = 3
    hits = []
    for v in itertools.product(range(-H, H + 1), repeat=3):
        if not any(v):
            continue
        # v in Lambda mod M iff v is congruent to a multiple of g
        if any(all((vi - t * gi) % M == 0 for vi, gi in zip(v, g)) for t in range(M)):
            hits.append(v)
    if hits:
        with pytest.raises(GenericityViolationError):
            check_genericity(model, height=H)
    else:
        check_genericity(model, height=H)


def test_level_theta_matches_listing(generic_model):
    th = level_theta(generic_model, 2, 30)
    lat = generic_model.base.sublattice(chain_basis(generic_model, 2))
    ref = np.zeros(31, dtype=np.int64)
    ref[0] = 1
    for _, q in vectors_up_to(lat, 30):
        ref[q] += 1
    assert np.array_equal(th, ref)


def test_square_class_set():
    assert square_class_set(1, 64) == [64, 81, 100, 121]
    assert square_class_set(2, 10) == [18]
    with pytest.raises(DomainError):
        square_class_set(0, 10)


def test_summed_counts_consistent(generic_model):
    rows = level_window_counts(generic_model, 1, 64)
    assert summed_counts(generic_model, 1, 64, generic_model.n0) == sum(c for _, c in rows)
    n1 = rows[0][0]
    assert summed_counts(generic_model, 1, 64, n1, n1 + 1) == rows[0][1] + rows[1][1]
    ms = square_class_set(1, 64)
    li = local_intersections(generic_model, ms)
    assert sum(li.values()) == sum(c for _, c in rows)
    assert counts_below(generic_model, 10) >= 0


def test_ek_bound(generic_model):
    # #{v != 0 : Q(v) <= X} <= prod(1 + 2 sqrt(X)/mu_i) <= 3^r sum_i X^(i/2)/a_i
    for n in range(1, 8):
        for X in (4, 50, 400):
            count, rhs = ek_terms(generic_model, n, X)
            assert count <= 3**5 * rhs


def test_mu_infinity_unit_form():
    # d/dt vol{|x|^2 <= t} at t = 1 for x in R^5 is (5/2) vol(B^5) = pi^(5/2)/Gamma(5/2)
    import math
    assert mu_infinity(Z5) == pytest.approx(math.pi**2.5 / math.gamma(2.5))


def test_density_disc_bound_domain():
    with pytest.raises(DomainError):
        density_disc_bound(quadratic_diagonal(1, 1, 1), 3, 1)
    lhs, rhs = density_disc_bound(Z5, 3, 1)
    assert lhs > 0 and rhs == pytest.approx(3**5 / 32**0.15)
