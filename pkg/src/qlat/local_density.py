"""Local representation densities mu_p(m, n) = p^(-n(r-1)) N_m(p^n).

Counts are computed from a p-adic Jordan splitting by a descent on the
non-good solutions: a solution whose unimodular components all vanish mod p
is p times a solution of a form with shifted valuations. Good solutions lift
by Hensel's lemma once n >= delta (delta = 1 for odd p, 3 for p = 2), and the
level-delta good counts come from character sums (odd p) or from a block by
block exhaustive count mod 8 (p = 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .arith import legendre, prime_factors, primes_upto, unit_mod, valuation
from .errors import BudgetExceededError, DomainError, PrecisionError
from .lattice_core import (
    IntegralLattice,
    JordanSplitting,
    _hyperbolic_pair,
    is_maximal_at,
    jordan_decompose,
    vectors_up_to,
)

BRUTE_BUDGET = 10**9
CLASSIFY_BUDGET = 2 * 10**7


@dataclass(frozen=True)
class DensityValue:
    p: int
    m: int
    n: int
    value: Fraction
    parts: tuple[Fraction, Fraction, Fraction] | None = None

    def __post_init__(self):
        if self.parts is not None and sum(self.parts) != self.value:
            raise ValueError("density parts do not add up")

    @property
    def good(self) -> Fraction:
        return self.parts[0]

    @property
    def bad(self) -> Fraction:
        return self.parts[1]

    @property
    def zero(self) -> Fraction:
        return self.parts[2]


@dataclass(frozen=True)
class LocalLimit:
    p: int
    m: int
    w: int
    value: Fraction


def delta(p: int) -> int:
    return 3 if p == 2 else 1


def w_level(p: int, m: int) -> int:
    """Stabilization level w_p(m)."""
    if m == 0:
        raise DomainError("w_p(0) is undefined")
    if p == 2:
        return 1 + 2 * valuation(2 * m, 2)
    return 1 + valuation(m, p)


# ----------------------------------------------------------------------------
# brute force oracles


def _components(gram) -> list[list[int]]:
    r = len(gram)
    seen = [False] * r
    comps = []
    for s in range(r):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            i = stack.pop()
            comp.append(i)
            for j in range(r):
                if not seen[j] and gram[i][j] != 0:
                    seen[j] = True
                    stack.append(j)
        comps.append(sorted(comp))
    return comps


def _residues(M: int, r: int, start: int, stop: int) -> np.ndarray:
    """Rows stop-start of (Z/M)^r in mixed-radix order."""
    idx = np.arange(start, stop, dtype=np.int64)
    out = np.empty((stop - start, r), dtype=np.int64)
    for i in range(r - 1, -1, -1):
        idx, out[:, i] = np.divmod(idx, M)
    return out


def _qvalues(gram, V: np.ndarray, M: int) -> np.ndarray:
    r = len(gram)
    acc = np.zeros(V.shape[0], dtype=np.int64)
    for i in range(r):
        if gram[i][i]:
            acc = (acc + (gram[i][i] // 2 % M) * (V[:, i] * V[:, i] % M)) % M
        for j in range(i + 1, r):
            if gram[i][j]:
                acc = (acc + (gram[i][j] % M) * (V[:, i] * V[:, j] % M)) % M
    return acc


def _cyclic_conv(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    M = len(a)
    out = np.zeros(M, dtype=object)
    for shift in np.nonzero(a)[0]:
        out += np.roll(b, shift).astype(object) * int(a[shift])
    return out


def _value_histogram(gram, M: int, chunk: int = 1 << 20) -> np.ndarray:
    r = len(gram)
    total = M**r
    hist = np.zeros(M, dtype=np.int64)
    for start in range(0, total, chunk):
        V = _residues(M, r, start, min(total, start + chunk))
        hist += np.bincount(_qvalues(gram, V, M), minlength=M)
    return hist


def count_brute(lat: IntegralLattice, p: int, n: int, m: int, budget: int = BRUTE_BUDGET) -> int:
    """#{v in (Z/p^n)^r : Q(v) = m mod p^n} by exhaustive enumeration.

    The Gram matrix is split into orthogonal components first; each component
    is enumerated completely and the value histograms are convolved.
    The budget caps the number of tuples enumerated per component.
    """
    if n < 0:
        raise DomainError("n must be non-negative")
    if n == 0:
        return 1
    M = p**n
    comps = _components(lat.gram)
    worst = max(M ** len(c) for c in comps)
    if worst > budget:
        raise BudgetExceededError("residue tuples", worst, budget)
    hist = None
    for comp in comps:
        sub = [[lat.gram[i][j] for j in comp] for i in comp]
        h = _value_histogram(sub, M)
        hist = h.astype(object) if hist is None else _cyclic_conv(hist, h)
    return int(hist[m % M])


def classify_solutions(lat: IntegralLattice, p: int, n: int, m: int,
                       budget: int = CLASSIFY_BUDGET) -> tuple[int, int, int]:
    """Exhaustive (good, bad, zero) split of the solutions mod p^n."""
    if n < 1:
        raise DomainError("classification needs n >= 1")
    r = lat.rank
    M = p**n
    if M**r > budget:
        raise BudgetExceededError("residue tuples", M**r, budget)
    split = jordan_decompose(lat, p)
    # Jordan coordinates y of v satisfy v = y B, so y = v B^-1 (mod p suffices)
    from .arith import rational_inverse

    Binv = rational_inverse([list(row) for row in split.basis])
    Binv_p = np.array([[unit_mod(x, p, p) for x in row] for row in Binv], dtype=np.int64)
    s0_cols = []
    pos = 0
    for bl in split.blocks:
        if bl.valuation == 0:
            s0_cols.extend(range(pos, pos + bl.dim))
        pos += bl.dim
    good = bad = zero = 0
    chunk = 1 << 20
    for start in range(0, M**r, chunk):
        V = _residues(M, r, start, min(M**r, start + chunk))
        sol = V[_qvalues(lat.gram, V, M) == m % M]
        if not len(sol):
            continue
        is_zero = np.all(sol % p == 0, axis=1)
        if s0_cols:
            Y = (sol % p) @ Binv_p % p
            is_good = np.any(Y[:, s0_cols] != 0, axis=1)
        else:
            is_good = np.zeros(len(sol), dtype=bool)
        zero += int(is_zero.sum())
        good += int(is_good.sum())
        bad += int((~is_zero & ~is_good).sum())
    return good, bad, zero


# ----------------------------------------------------------------------------
# counts from the Jordan form
#
# A form is a sorted tuple of blocks (nu, dim, coeffs); coeffs are the unit
# form coefficients reduced mod p^n at the level where the form is used.


def _form_of(split: JordanSplitting) -> tuple:
    return tuple(sorted((bl.valuation, bl.dim, bl.coeffs) for bl in split.blocks))


def _canon(form, p: int, n: int) -> tuple:
    M = p ** max(n, 3 if p == 2 else 1)
    cap = max(n, 1)
    return tuple(sorted((min(nu, cap), dim, tuple(c % M for c in co)) for nu, dim, co in form))


def _shift(form) -> tuple:
    """Valuations 0 -> 1 and nu -> nu - 1 otherwise."""
    return tuple(sorted((1 if nu == 0 else nu - 1, dim, co) for nu, dim, co in form))


def _rank(form) -> int:
    return sum(dim for _, dim, _ in form)


def _unit_dim(form) -> int:
    return sum(dim for nu, dim, _ in form if nu == 0)


def diagonal_point_count(units, c: int, p: int) -> int:
    """#{x in F_p^s : sum u_i x_i^2 = c} for units u_i and odd p."""
    s = len(units)
    c %= p
    if s == 0:
        return 1 if c == 0 else 0
    D = math.prod(units) % p
    if s % 2 == 0:
        eta = legendre((-1) ** (s // 2) * D, p)
        if c == 0:
            return p ** (s - 1) + (p - 1) * p ** (s // 2 - 1) * eta
        return p ** (s - 1) - p ** (s // 2 - 1) * eta
    if c == 0:
        return p ** (s - 1)
    return p ** (s - 1) + p ** ((s - 1) // 2) * legendre((-1) ** ((s - 1) // 2) * c * D, p)


def _block_hist(nu: int, dim: int, co, p: int, n: int, even_only: bool) -> np.ndarray:
    M = p**n
    step = p if even_only else 1
    x = np.arange(0, M, step, dtype=np.int64)
    scale = p**nu % M
    if dim == 1:
        vals = co[0] % M * (x * x % M) % M
    else:
        a, b, c = (t % M for t in co)
        X, Y = np.meshgrid(x, x, indexing="ij")
        vals = (a * (X * X % M) + b * (X * Y % M) + c * (Y * Y % M)) % M
    return np.bincount((vals.ravel() * scale) % M, minlength=M)


def _good_by_histogram(form, p: int, m: int, n: int) -> int:
    M = p**n
    full = None
    restricted = None
    for nu, dim, co in form:
        h_full = _block_hist(nu, dim, co, p, n, False)
        h_res = _block_hist(nu, dim, co, p, n, True) if nu == 0 else h_full
        full = h_full.astype(object) if full is None else _cyclic_conv(full, h_full)
        restricted = h_res.astype(object) if restricted is None else _cyclic_conv(restricted, h_res)
    return int(full[m % M]) - int(restricted[m % M])


@lru_cache(maxsize=None)
def _good_count(form, p: int, m: int, n: int) -> int:
    r = _rank(form)
    if p == 2:
        if n >= 3:
            return 2 ** ((n - 3) * (r - 1)) * _good_by_histogram(form, 2, m % 8, 3)
        return _good_by_histogram(form, 2, m % 2**n, n)
    units = [co[0] for nu, _, co in form if nu == 0]
    s0 = len(units)
    base = p ** (r - s0) * (diagonal_point_count(units, m, p) - (1 if m % p == 0 else 0))
    return p ** ((n - 1) * (r - 1)) * base


def good_count(form, p: int, m: int, n: int) -> int:
    if n < 1:
        raise DomainError("good-type counts need n >= 1")
    return _good_count(_canon(form, p, n), p, m % p**n, n)


@lru_cache(maxsize=None)
def _total(form, p: int, m: int, n: int) -> int:
    if n == 0:
        return 1
    g = _good_count(form, p, m, n)
    if m % p:
        return g
    r = _rank(form)
    sub = _canon(_shift(form), p, n - 1)
    return g + p ** (r - _unit_dim(form)) * _total(sub, p, (m // p) % p ** (n - 1), n - 1)


def total_count(form, p: int, m: int, n: int) -> int:
    return _total(_canon(form, p, n), p, m % p**n, n)


def zero_count(form, p: int, m: int, n: int) -> int:
    m %= p**n
    if n == 1:
        return 1 if m == 0 else 0
    if m % (p * p):
        return 0
    return p ** _rank(form) * total_count(form, p, m // (p * p), n - 2)


def bad_count(form, p: int, m: int, n: int) -> int:
    m %= p**n
    if m % p:
        return 0
    if n >= 2 and all(nu <= 1 for nu, _, _ in form):
        # no bad points of the second kind: descend to the swapped form
        swapped = tuple(sorted((1 - nu, dim, co) for nu, dim, co in form))
        return p ** (_rank(form) - _unit_dim(form)) * good_count(swapped, p, m // p, n - 1)
    return total_count(form, p, m, n) - good_count(form, p, m, n) - zero_count(form, p, m, n)


# ----------------------------------------------------------------------------
# public density API


def _check_precision(split: JordanSplitting, n: int):
    if n > split.precision:
        raise PrecisionError(f"level {n} exceeds the Jordan precision {split.precision}")


def mu_good_base(lat: IntegralLattice, p: int, m: int) -> Fraction:
    """mu_p^good(m, delta)."""
    d = delta(p)
    split = jordan_decompose(lat, p)
    return Fraction(good_count(_form_of(split), p, m, d), p ** (d * (lat.rank - 1)))


def mu_p(lat: IntegralLattice, p: int, m: int, n: int, method: str = "recursion",
         precision: int = 40) -> DensityValue:
    """Exact mu_p(m, n) with its (good, bad, zero) parts."""
    if n < 0:
        raise DomainError("n must be non-negative")
    if n == 0:
        return DensityValue(p, m, 0, Fraction(1))
    r = lat.rank
    norm = p ** (n * (r - 1))
    if method == "brute":
        if p ** (n * r) <= CLASSIFY_BUDGET:
            g, b, z = classify_solutions(lat, p, n, m)
            return DensityValue(p, m, n, Fraction(g + b + z, norm),
                                (Fraction(g, norm), Fraction(b, norm), Fraction(z, norm)))
        return DensityValue(p, m, n, Fraction(count_brute(lat, p, n, m), norm))
    if method != "recursion":
        raise DomainError(f"unknown method {method!r}")
    split = jordan_decompose(lat, p, precision)
    _check_precision(split, n)
    form = _form_of(split)
    g = good_count(form, p, m, n)
    z = zero_count(form, p, m, n)
    b = bad_count(form, p, m, n)
    return DensityValue(p, m, n, Fraction(g + b + z, norm),
                        (Fraction(g, norm), Fraction(b, norm), Fraction(z, norm)))


def mu_value(lat: IntegralLattice, p: int, m: int, n: int) -> Fraction:
    """mu_p(m, n) without the parts."""
    if n == 0:
        return Fraction(1)
    split = jordan_decompose(lat, p)
    _check_precision(split, n)
    return Fraction(total_count(_form_of(split), p, m, n), p ** (n * (lat.rank - 1)))


def mu_p_explicit(lat: IntegralLattice, p: int, m: int, n: int) -> Fraction:
    """Closed three-case expression for odd p and valuations <= 1.

    Uses only level-1 good densities of Q and of the swapped form Q'.
    """
    if p == 2:
        raise DomainError("the closed expression is for odd p")
    if m == 0:
        raise DomainError("m must be nonzero")
    split = jordan_decompose(lat, p)
    form = _form_of(split)
    if any(nu > 1 for nu, _, _ in form):
        raise DomainError("the closed expression needs valuations <= 1")
    if n == 0:
        return Fraction(1)
    r = lat.rank
    s0 = _unit_dim(form)
    swapped = tuple(sorted((1 - nu, dim, co) for nu, dim, co in form))
    has_bad = any(nu == 1 for nu, _, _ in form)

    def g1(f, c):
        if c.denominator != 1:
            return Fraction(0)
        return Fraction(good_count(f, p, int(c), 1), p ** (r - 1))

    def tail(upper_good, upper_bad):
        s = Fraction(0)
        for u in range(upper_good + 1):
            s += Fraction(p) ** ((2 - r) * u) * g1(form, Fraction(m, p ** (2 * u)))
        if has_bad:
            for u in range(upper_bad + 1):
                s += (Fraction(p) ** (1 - s0) * Fraction(p) ** ((2 - r) * u)
                      * g1(swapped, Fraction(m, p ** (2 * u + 1))))
        return s

    v = valuation(m, p)
    if n >= v + 1:
        return tail(v // 2, (v - 1) // 2)
    if n % 2 == 1:
        lead = Fraction(p) ** ((2 - r) * (n - 1) // 2) * mu_value(lat, p, m // p ** (n - 1), 1)
        return lead + tail((n - 3) // 2, (n - 3) // 2)
    z2 = Fraction(zero_count(form, p, m // p ** (n - 2), 2), p ** (2 * (r - 1)))
    lead = Fraction(p) ** ((2 - r) * (n - 2) // 2) * z2
    return lead + tail((n - 2) // 2, (n - 2) // 2)


def mu_p_limit(lat: IntegralLattice, p: int, m: int) -> LocalLimit:
    """The stabilized density mu_p(Q, m) = mu_p(m, w_p(m))."""
    w = w_level(p, m)
    return LocalLimit(p, m, w, mu_value(lat, p, m, w))


def is_representable(lat: IntegralLattice, m: int, search: int = 6) -> bool:
    """Whether Q represents m over Z (decided for definite or split lattices)."""
    if m == 0:
        return True
    if _hyperbolic_pair(np.array(lat.gram, dtype=np.int64)) is not None:
        return True
    if lat.is_positive_definite():
        return m > 0 and any(q == m for _, q in vectors_up_to(lat, m))
    if lat.signature[0] == 0:
        return m < 0 and is_representable(IntegralLattice([[-x for x in row] for row in lat.gram]), -m)
    # indefinite without an obvious hyperbolic plane: box search
    import itertools

    for v in itertools.product(range(-search, search + 1), repeat=lat.rank):
        if lat.Q(v) == m:
            return True
    raise DomainError(f"could not decide whether {m} is represented (box {search})")


def count_identity_deviation(lat: IntegralLattice, p: int, m: int, method: str = "recursion") -> Fraction:
    """method="explicit" evaluates every level through the closed odd-p expression."""
    if method not in ("recursion", "explicit"):
        raise DomainError(f"unknown method {method!r}")
    mu = mu_p_explicit if method == "explicit" else mu_value
    w = w_level(p, m)
    top = mu(lat, p, m, w)
    s = sum((mu(lat, p, m, n) for n in range(w)), Fraction(0))
    return abs(w - s / top)


def check_count_identity(lat: IntegralLattice, p: int, m: int) -> Fraction:
    """|w_p - sum_{n < w_p} mu_p(m, n) / mu_p(m, w_p)|, exactly."""
    if not is_representable(lat, m):
        raise DomainError(f"{m} is not represented by the lattice")
    return count_identity_deviation(lat, p, m)


# ----------------------------------------------------------------------------
# singular series


class SingularSeries(NamedTuple):
    value: float
    error_bound: float


def tail_exponent(r: int) -> float:
    # |mu_p - 1| <= p^(-(r-1)/2) when p does not divide 2 m det
    return (r - 1) / 2


def singular_tail_bound(r: int, P: float) -> float:
    """Relative error bound for dropping all primes p > P not dividing 2 m det."""
    e = tail_exponent(r)
    if e <= 1:
        raise DomainError("the tail bound needs rank >= 4")
    return math.expm1(4 / 3 * P ** (1 - e) / (e - 1))


def local_factors(lat: IntegralLattice, m: int, P_trunc: int) -> dict[int, Fraction]:
    if m <= 0:
        raise DomainError("the singular series is taken at m > 0")
    support = prime_factors(2 * m * lat.det)
    if P_trunc < max(support):
        raise DomainError(f"truncation {P_trunc} is below the support prime {max(support)}")
    for p in prime_factors(2 * lat.det):
        if not is_maximal_at(lat, p):
            raise DomainError(f"lattice is not maximal at {p}")
    return {p: mu_p_limit(lat, p, m).value for p in primes_upto(P_trunc)}


def singular_series_exact(lat: IntegralLattice, m: int, P_trunc: int) -> Fraction:
    return math.prod(local_factors(lat, m, P_trunc).values(), start=Fraction(1))


def singular_series(lat: IntegralLattice, m: int, P_trunc: int) -> SingularSeries:
    """Truncated product of the local factors and a relative tail bound."""
    factors = local_factors(lat, m, P_trunc)
    value = 1.0
    for p in sorted(factors):
        value *= float(factors[p])
    return SingularSeries(value, singular_tail_bound(lat.rank, P_trunc))
