"""Coefficient layer of the weight-k Eisenstein series attached to L.

Everything is assembled from exact local counts: the polynomials
L_m^(p)(t), the finite Euler product sigma_m(s) at s = k with its logarithmic
derivative, and the normalized coefficient a(m) = m^(b/2) prod_p mu_p(Q, m).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import fundamental_discriminant, is_square, kronecker, prime_factors
from .errors import DomainError
from .lattice_core import IntegralLattice, discriminant_group, jordan_decompose
from .local_density import _form_of, singular_series, total_count, w_level


@dataclass(frozen=True)
class LpPolynomial:
    p: int
    m: int
    w: int
    coeffs: tuple[int, ...]  # ascending powers of t

    def __call__(self, t):
        return sum(c * t**i for i, c in enumerate(self.coeffs))

    def derivative(self, t):
        return sum(i * c * t ** (i - 1) for i, c in enumerate(self.coeffs) if i)


def local_counts(lat: IntegralLattice, p: int, m: int, top: int) -> list[int]:
    """[N_m(p^0), ..., N_m(p^top)]."""
    form = _form_of(jordan_decompose(lat, p))
    return [total_count(form, p, m, n) for n in range(top + 1)]


def lp_polynomial(lat: IntegralLattice, p: int, m: int) -> LpPolynomial:
    """L(t) = N(p^w) t^w + (1 - p^(r-1) t) sum_{n<w} N(p^n) t^n."""
    w = w_level(p, m)
    N = local_counts(lat, p, m, w)
    q = p ** (lat.rank - 1)
    coeffs = [N[0]]
    for n in range(1, w):
        coeffs.append(N[n] - q * N[n - 1])
    coeffs.append(N[w] - q * N[w - 1])
    return LpPolynomial(p, m, w, tuple(coeffs))


def aux_discriminant(lat: IntegralLattice, D: int) -> int:
    r = lat.rank
    if r % 2 == 0:
        return (-1) ** (r // 2) * lat.det
    return 2 * (-1) ** ((r + 1) // 2) * D * lat.det


def chi_d0(lat: IntegralLattice, D: int, p: int) -> int:
    """Kronecker symbol (d0 | p) for the fundamental discriminant d0 of Q(sqrt d)."""
    return kronecker(fundamental_discriminant(aux_discriminant(lat, D)), p)


def weight(lat: IntegralLattice) -> float:
    return 1 + lat.b / 2


@dataclass(frozen=True)
class SigmaData:
    m: int
    d: int
    d0: int
    value_at_k: float
    logderiv_at_k: float
    factors: tuple[tuple[int, float, float], ...] = ()  # (p, factor, log-derivative term)


def _check_square_class(lat: IntegralLattice, D: int, m: int):
    if D < 1 or m < 1:
        raise DomainError("D and m must be positive")
    if lat.rank % 2 == 1 and (m % D or not is_square(m // D)):
        raise DomainError(f"m={m} is not D times a square (D={D})")


def sigma_m(lat: IntegralLattice, D: int, m: int) -> SigmaData:
    """sigma_m(k) and sigma_m'(k)/sigma_m(k) as finite products over p | 2 m det."""
    _check_square_class(lat, D, m)
    r = lat.rank
    k = weight(lat)
    d = aux_discriminant(lat, D)
    d0 = fundamental_discriminant(d)
    value = 1.0
    logderiv = 0.0
    rows = []
    for p in prime_factors(2 * m * lat.det):
        L = lp_polynomial(lat, p, m)
        t = Fraction(1, p ** (r - 1))
        Lt = L(t)
        tLp = t * L.derivative(t) / Lt  # exact
        chi = kronecker(d0, p)
        if r % 2 == 0:
            f = float(Lt) / (1 - chi * p ** (-k))
            ld = -(float(tLp) + chi / (p**k - chi)) * math.log(p)
        else:
            f = (1 - chi * p ** (0.5 - k)) / (1 - p ** (1 - 2 * k)) * float(Lt)
            ld = -(float(tLp) - chi / (p ** (k - 0.5) - chi) + 2 / (p ** (2 * k - 1) - 1)) * math.log(p)
        value *= f
        logderiv += ld
        rows.append((p, f, ld))
    return SigmaData(m, d, d0, value, logderiv, tuple(rows))


@dataclass(frozen=True)
class CoefficientEstimate:
    m: int
    a_value: float
    c_value: float
    trunc_error: float
    P_trunc: int


def coefficient_scale(lat: IntegralLattice) -> float:
    """C_L = (2 pi)^k / (sqrt|L^v/L| Gamma(k)), so that |c(m)| = 2 C_L a(m)."""
    k = weight(lat)
    return (2 * math.pi) ** k / (math.sqrt(discriminant_group(lat).order) * math.gamma(k))


def default_ptrunc(lat: IntegralLattice, m: int) -> int:
    return max(100, max(prime_factors(2 * m * lat.det)))


def a_of_m(lat: IntegralLattice, m: int, P_trunc: int | None = None) -> CoefficientEstimate:
    if lat.rank < 5:
        raise DomainError("a(m) is implemented for rank >= 5")
    P = default_ptrunc(lat, m) if P_trunc is None else P_trunc
    ss = singular_series(lat, m, P)
    a = m ** (lat.b / 2) * ss.value
    c = -2 * coefficient_scale(lat) * a
    return CoefficientEstimate(m, a, c, ss.error_bound, P)


def bprime_ratio(lat: IntegralLattice, D: int, m: int, kappa: float = 0.0) -> float:
    """log m + 2 sigma'/sigma + kappa; kappa stands for the unknown O(1) constant."""
    return math.log(m) + 2 * sigma_m(lat, D, m).logderiv_at_k + kappa
