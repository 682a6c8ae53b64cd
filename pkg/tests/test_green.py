import math

import numpy as np
import pytest
from scipy.special import hyp2f1

from qlat.errors import DomainError
from qlat.eisenstein_series import a_of_m
from qlat.green_archimedean import (A_of_m, G_half, HyperKernel, archimedean_report, classify_bad, count_region,
                                    equidist_ratio, equidist_target, h_integral_check, h_integral_closed,
                                    shell_volume, sphere_pair, volume_omega, volume_omega_mc)
from qlat.lattice_core import enumerate_representations


def test_kernel_at_zero():
    ker = HyperKernel(1.25, 2.5)
    assert ker.G(0.0) == pytest.approx(0.6)
    assert ker.F(0.0) == 1


@pytest.mark.parametrize("s,k", [(1.25, 2.5), (2.0, 3.0), (3.5, 2.5), (1.75, 4.5)])
@pytest.mark.parametrize("z", [-0.7, -0.1, 0.2, 0.6, 0.95])
def test_kernel_against_scipy(s, k, z):
    ker = HyperKernel(s, k)
    ref = hyp2f1(s - 1 + k / 2, s + 1 - k / 2, 2 * s, z)
    assert ker.F(z) == pytest.approx(ref, rel=1e-11)
    G, err = ker.series(z)
    assert err <= 1e-13 * max(1, abs(G))


def test_kernel_domain():
    with pytest.raises(DomainError):
        HyperKernel(1.25, 2.5).G(1.0)


@pytest.mark.parametrize("b", [1, 3, 4, 7])
def test_G_half_matches_series(b):
    k = 1 + b / 2
    ker = HyperKernel(k / 2, k)
    for z in (0.0, 0.3, 0.8, 0.97):
        assert G_half(z, b) == pytest.approx(ker.G(z), rel=1e-10)


def test_G_half_near_one_matches_scipy():
    b = 3
    k = 1 + b / 2
    z = 0.9999
    ref = (hyp2f1(k - 1, 1, k, z) - 1) / z
    assert G_half(z, b) == pytest.approx(ref, rel=1e-9)


def test_volumes(L5):
    assert volume_omega(L5, 0) == 0
    assert shell_volume(L5, 2) == pytest.approx(volume_omega(L5, 3) - volume_omega(L5, 2))
    est, se = volume_omega_mc(L5, 3.0, samples=2 * 10**5, seed=5)
    assert abs(est - volume_omega(L5, 3.0)) < 5 * se


def test_h_integral(L5):
    mc, closed = h_integral_check(L5, 1.5, samples=2 * 10**5, seed=2)
    assert closed == pytest.approx(h_integral_closed(L5, 1.5))
    assert mc == pytest.approx(closed, rel=0.05)


def test_count_region(L5, pt):
    assert count_region(L5, pt, 100, 1.0) == 119514
    vecs = enumerate_representations(L5, pt, 7, 2.0)
    assert count_region(L5, pt, 7, 2.0) == len(vecs)


def test_A_of_m_against_listing(L5, pt):
    rep = A_of_m(L5, pt, 10, with_table=True)
    assert all(-10 <= q < 0 for _, q in rep.table)
    direct = 2 * sum(math.log(10 / -q) for _, q in rep.table)
    assert rep.A == pytest.approx(direct, rel=1e-12)
    assert rep.A == pytest.approx(rep.A_mt + rep.A_er)
    assert rep.vector_count == len(rep.table)
    assert A_of_m(L5, pt, 0).A == 0


def test_report_regression(L5, pt):
    rep = archimedean_report(L5, pt, 1, 16)
    assert rep.Phi == pytest.approx(-10521.6, rel=1e-4)
    c = a_of_m(L5, 16).c_value
    assert rep.Phi == pytest.approx(rep.phi_tilde + rep.R_x - abs(c) * (math.log(16) + 2 * -0.0), abs=abs(c) * 3)
    assert rep.uncertainty > 0


def test_equidistribution_ratio(L5, pt):
    r = equidist_ratio(L5, pt, 2000, 1.0, 3.0)
    target = equidist_target(L5, 1.0, 3.0)
    assert target == pytest.approx((2 * math.sqrt(2) - 1) / 7)
    assert abs(r - target) / target < 0.2
    with pytest.raises(DomainError):
        equidist_ratio(L5, pt, 20, 3.0, 1.0)


def test_sphere_pair_methods_agree(L5, pt):
    vecs = enumerate_representations(L5, pt, 40, 1.0)[:1500]
    ex = sphere_pair(L5, pt, vecs, exhaustive_max=10**4)
    kd = sphere_pair(L5, pt, vecs, exhaustive_max=0)
    assert ex.q_perp == pytest.approx(kd.q_perp)
    assert np.array_equal(np.subtract(ex.v, ex.v2), ex.w)
    assert abs(ex.q_x) <= 4 * 40


def test_classify_bad_small(L5, pt):
    bad = classify_bad(L5, pt, 8)
    assert all(8 <= m < 16 for m in bad)
