"""Synthetic chains of p-adically shrinking lattices.

A chain model fixes a positive definite base lattice, a prime p, a
ramification index e, a base level n0 and a saturated Z_p-sublattice Lambda of
base (x) Z_p, known modulo p^precision. Level n is

    L_n = (Lambda + p^k base (x) Z_p) cap base,    k = ceil((n - n0) / e),

i.e. the integer vectors whose reduction mod p^k lies in Lambda mod p^k.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .arith import hnf_rows, int_det, is_square, lll_gram, rational_inverse
from .errors import DomainError, GenericityViolationError, InvalidLatticeError, PrecisionError
from .lattice_core import IntegralLattice, short_vectors, successive_minima, theta_counts
from .local_density import mu_p_limit

DEFAULT_HEIGHT = 10**6
DEFAULT_PRECISION = 64


def _rank_mod_p(rows, p: int) -> int:
    a = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(a[0]) if a else 0
    for c in range(ncols):
        piv = next((i for i in range(rank, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        inv = pow(a[rank][c], -1, p)
        a[rank] = [x * inv % p for x in a[rank]]
        for i in range(len(a)):
            if i != rank and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class ChainModel:
    base: IntegralLattice
    p: int
    e: int
    n0: int
    Lambda: tuple[tuple[int, ...], ...]
    lambda_rank: int
    precision: int = DEFAULT_PRECISION
    aut: int = 1
    height: int = field(default=DEFAULT_HEIGHT, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "Lambda", tuple(tuple(int(x) % self.p**self.precision for x in g)
                                                 for g in self.Lambda))
        r = self.base.rank
        if not self.base.is_positive_definite():
            raise InvalidLatticeError("chain base must be positive definite")
        if self.e < 1 or self.n0 < 1 or self.aut < 1 or self.precision < 1:
            raise InvalidLatticeError("e, n0, aut and precision must be positive")
        if len(self.Lambda) != self.lambda_rank or any(len(g) != r for g in self.Lambda):
            raise InvalidLatticeError("Lambda must have lambda_rank generators of length rank(base)")
        if self.lambda_rank > r:
            raise InvalidLatticeError("lambda_rank exceeds the base rank")
        if self.lambda_rank and _rank_mod_p(self.Lambda, self.p) != self.lambda_rank:
            raise InvalidLatticeError("Lambda is not saturated: generators are dependent mod p")

    @property
    def rank(self) -> int:
        return self.base.rank

    def level_exponent(self, n: int) -> int:
        if n < self.n0:
            raise DomainError(f"level {n} is below the base level {self.n0}")
        return -((self.n0 - n) // self.e)

    def to_text(self) -> str:
        lines = [str(self.rank)]
        lines += [" ".join(map(str, row)) for row in self.base.gram]
        lines.append(f"{self.p} {self.e} {self.n0} {self.precision} {self.aut} {self.lambda_rank}")
        lines += [" ".join(map(str, g)) for g in self.Lambda]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, height: int = DEFAULT_HEIGHT) -> ChainModel:
        toks = []
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if line:
                toks.extend(line.split())
        try:
            vals = [int(t) for t in toks]
            r = vals[0]
            gram = [vals[1 + i * r: 1 + (i + 1) * r] for i in range(r)]
            pos = 1 + r * r
            p, e, n0, prec, aut, s = vals[pos: pos + 6]
            pos += 6
            gens = [vals[pos + i * r: pos + (i + 1) * r] for i in range(s)]
            if len(vals) != pos + s * r or any(len(g) != r for g in gens) or len(gram[-1]) != r:
                raise ValueError
        except (ValueError, IndexError):
            raise InvalidLatticeError("malformed chain model file") from None
        return cls(IntegralLattice(gram), p, e, n0, tuple(map(tuple, gens)), s, prec, aut, height)

    @classmethod
    def load(cls, path, height: int = DEFAULT_HEIGHT) -> ChainModel:
        with open(path) as fh:
            return cls.from_text(fh.read(), height)

    @classmethod
    def random(cls, base: IntegralLattice, p: int, lambda_rank: int, *, e: int = 1, n0: int = 1,
               precision: int = DEFAULT_PRECISION, seed: int = 0) -> ChainModel:
        """Uniform Lambda among saturated rank-s sublattices (rejection on rank mod p)."""
        rng = random.Random(seed)
        M = p**precision
        while True:
            gens = tuple(tuple(rng.randrange(M) for _ in range(base.rank)) for _ in range(lambda_rank))
            if lambda_rank == 0 or _rank_mod_p(gens, p) == lambda_rank:
                return cls(base, p, e, n0, gens, lambda_rank, precision)


def random_base(rank: int, seed: int = 0, spread: int = 2) -> IntegralLattice:
    """Q(v) = |M v|^2 for a random nonsingular integer M."""
    rng = random.Random(seed)
    while True:
        M = [[rng.randint(-spread, spread) for _ in range(rank)] for _ in range(rank)]
        if int_det(M) != 0:
            break
    G = [[2 * sum(M[k][i] * M[k][j] for k in range(rank)) for j in range(rank)] for i in range(rank)]
    return IntegralLattice(G)


@lru_cache(maxsize=4096)
def _basis_at(model: ChainModel, k: int) -> tuple[tuple[int, ...], ...]:
    r = model.rank
    if k == 0:
        return tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
    M = model.p**k
    gens = [[x % M for x in g] for g in model.Lambda]
    gens += [[M * int(i == j) for j in range(r)] for i in range(r)]
    return tuple(map(tuple, hnf_rows(gens)))


def chain_basis(model: ChainModel, n: int) -> tuple[tuple[int, ...], ...]:
    """HNF basis (rows, base coordinates) of L_n."""
    k = model.level_exponent(n)
    if k > model.precision:
        raise PrecisionError(f"level {n} needs precision {k} > {model.precision}")
    return _basis_at(model, k)


def chain_lattice(model: ChainModel, n: int) -> IntegralLattice:
    return model.base.sublattice(chain_basis(model, n))


def chain_index(model: ChainModel, n: int) -> int:
    return abs(int_det(chain_basis(model, n)))


def expected_index(model: ChainModel, n: int) -> int:
    return model.p ** (model.level_exponent(n) * (model.rank - model.lambda_rank))


def is_sublattice(inner, outer) -> bool:
    """Every row of `inner` is an integral combination of the rows of `outer`."""
    inv = rational_inverse(outer)
    for v in inner:
        for j in range(len(inv)):
            if sum(Fraction(v[i]) * inv[i][j] for i in range(len(v))).denominator != 1:
                return False
    return True


def check_genericity(model: ChainModel, height: int | None = None) -> None:
    """Raise unless no nonzero v with |v|_inf <= H has v mod p^precision in Lambda.

    Such v all lie in the lattice Lambda + p^precision Z^r. After LLL, the
    smallest Gram-Schmidt norm bounds its minimum from below; only when that
    bound is inconclusive do we enumerate.
    """
    H = model.height if height is None else height
    r = model.rank
    M = model.p**model.precision
    gens = [list(g) for g in model.Lambda] + [[M * int(i == j) for j in range(r)] for i in range(r)]
    B = hnf_rows(gens)
    gram = [[sum(x * y for x, y in zip(u, v)) for v in B] for u in B]
    U, G = lll_gram(gram)
    gs: list[Fraction] = []
    mu: list[list[Fraction]] = []
    for i in range(r):
        row = []
        for j in range(i):
            s = Fraction(G[i][j]) - sum(row[t] * mu[j][t] * gs[t] for t in range(j))
            row.append(s / gs[j])
        gs.append(G[i][i] - sum(row[t] ** 2 * gs[t] for t in range(i)))
        mu.append(row)
    bound = r * H * H
    if min(gs) > bound:
        return
    for c in short_vectors([[float(x) for x in row] for row in G], float(bound)):
        coeffs = [int(x) for x in c]
        if not any(coeffs):
            continue
        v = [sum(coeffs[i] * U[i][t] for i in range(r)) for t in range(r)]
        v = [sum(v[i] * B[i][t] for i in range(r)) for t in range(r)]
        if max(abs(x) for x in v) <= H:
            raise GenericityViolationError(f"vector {v} of height <= {H} lies in Lambda")


@dataclass(frozen=True)
class MinimaProfile:
    n: int
    mu: tuple[float, ...]
    a: tuple[float, ...]


def minima_profile(model: ChainModel, n: int) -> MinimaProfile:
    mu, a, _ = successive_minima(chain_lattice(model, n))
    return MinimaProfile(n, tuple(mu), tuple(a))


def _max_level(model: ChainModel) -> int:
    return model.n0 + model.e * model.precision


@lru_cache(maxsize=256)
def _theta_at(model: ChainModel, k: int, N: int):
    return theta_counts(model.base.sublattice(_basis_at(model, k)), N)


def level_theta(model: ChainModel, n: int, N: int):
    """c[q] = #{v in L_n : Q(v) = q} for q <= N."""
    if n > _max_level(model):
        raise GenericityViolationError(f"level {n} lies beyond the precision window")
    chain_basis(model, n)  # precision check
    return _theta_at(model, model.level_exponent(n), int(N))


def level_counts(model: ChainModel, m: int, empty_levels: int = 3) -> list[tuple[int, int]]:
    """[(n, #{v in L_n : Q(v) = m})] from n0 until `empty_levels` levels with mu_1^2 > m."""
    if m < 1:
        raise DomainError("m must be positive")
    rows = []
    empty = 0
    n = model.n0
    while empty < empty_levels:
        try:
            th = level_theta(model, n, m)
        except (GenericityViolationError, PrecisionError):
            raise GenericityViolationError(f"counts for m={m} did not vanish within precision") from None
        rows.append((n, int(th[m])))
        # nothing of norm <= m means mu_1(n)^2 > m, and L_n only shrinks
        empty = empty + 1 if not th[1:].any() else 0
        n += 1
    return rows


def local_intersection(model: ChainModel, m: int) -> Fraction:
    return Fraction(sum(c for _, c in level_counts(model, m)), model.aut)


def local_intersections(model: ChainModel, ms) -> dict[int, Fraction]:
    """local_intersection for many m at once, sharing one theta histogram per level."""
    ms = sorted(set(int(m) for m in ms))
    if not ms:
        return {}
    N = ms[-1]
    totals = dict.fromkeys(ms, 0)
    for _, th in _levels_below(model, N, model.n0, None):
        for m in ms:
            totals[m] += int(th[m])
    return {m: Fraction(c, model.aut) for m, c in totals.items()}


def square_class_set(D: int, X: int) -> list[int]:
    """S_{D,X} = {m : X <= m < 2X, m/D a perfect square}."""
    if D < 1 or X < 1:
        raise DomainError("D and X must be positive")
    return [m for m in range(X, 2 * X) if m % D == 0 and is_square(m // D)]


def _levels_below(model: ChainModel, N: int, start: int, stop: int | None):
    """Yield (n, theta up to N) from `start`; with stop=None, until L_n has nothing of norm <= N."""
    n = max(start, model.n0)
    while stop is None or n <= stop:
        try:
            th = level_theta(model, n, N)
        except PrecisionError:
            raise GenericityViolationError("level sum did not terminate within precision") from None
        if stop is None and not th[1:].any():
            return
        yield n, th
        n += 1


def summed_counts(model: ChainModel, D: int, X: int, a: int, b_level: int | None = None) -> int:
    """sum_{n=a}^{b_level} #{v in L_n : Q(v) in S_{D,X}}; b_level=None runs until the counts vanish."""
    if b_level is not None and a >= b_level:
        raise DomainError("need a < b_level")
    S = square_class_set(D, X)
    return sum(int(th[S].sum()) for _, th in _levels_below(model, 2 * X - 1, a, b_level))


def level_window_counts(model: ChainModel, D: int, X: int) -> list[tuple[int, int]]:
    S = square_class_set(D, X)
    return [(n, int(th[S].sum())) for n, th in _levels_below(model, 2 * X - 1, model.n0, None)]


def counts_below(model: ChainModel, X: int, start: int | None = None) -> int:
    """sum_{n >= start} #{v in L_n minus 0 : Q(v) < X}."""
    first = model.n0 if start is None else start
    return sum(int(th[1:].sum()) for _, th in _levels_below(model, X - 1, first, None))


def ek_terms(model: ChainModel, n: int, X: int) -> tuple[int, float]:
    """(#{v in L_n minus 0 : Q(v) <= X}, sum_i X^(i/2) / a_i(n))."""
    prof = minima_profile(model, n)
    count = int(level_theta(model, n, X)[1:].sum())
    return count, sum(X ** (i / 2) / a for i, a in enumerate(prof.a))


def mu_infinity(lat: IntegralLattice) -> float:
    """Singular integral at 1: d/dt vol{Q <= t} at t = 1."""
    r = lat.rank
    det_half = lat.det / 2**r
    return math.pi ** (r / 2) / (math.gamma(r / 2) * math.sqrt(det_half))


def density_disc_bound(lat: IntegralLattice, p: int, m: int) -> tuple[float, float]:
    """(mu_inf(Q,1) mu_p(Q,m), p^r / Disc^(3/20)) with Disc = det of the Gram matrix."""
    if lat.rank < 5 or not lat.is_positive_definite():
        raise DomainError("needs a positive definite lattice of rank >= 5")
    lhs = mu_infinity(lat) * float(mu_p_limit(lat, p, m).value)
    rhs = p**lat.rank / float(lat.det) ** 0.15
    return lhs, rhs
