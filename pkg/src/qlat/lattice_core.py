"""Integral quadratic lattices, p-adic Jordan splittings, period points and enumeration.

Gram matrices hold bilinear values (e_i.e_j), so Q(v) = v^T G v / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from pathlib import Path

import numpy as np

from . import _kernels
from .arith import int_det, lll_gram, rational_inverse, unit_mod, valuation
from .errors import (
    BudgetExceededError,
    DomainError,
    InvalidLatticeError,
    PrecisionError,
    UnsupportedSizeError,
)

INT64_SAFE = 2**62


def _inertia(rows) -> tuple[int, int]:
    """Exact (pos, neg) inertia by symmetric elimination over Q."""
    a = [[Fraction(x) for x in r] for r in rows]
    pos = neg = 0
    while a:
        n = len(a)
        piv = next((i for i in range(n) if a[i][i] != 0), None)
        if piv is None:
            hit = next(((i, j) for i in range(n) for j in range(i + 1, n) if a[i][j] != 0), None)
            if hit is None:
                break
            i, j = hit
            # e_i <- e_i + e_j makes the diagonal entry nonzero
            for k in range(n):
                a[i][k] += a[j][k]
            for k in range(n):
                a[k][i] += a[k][j]
            piv = i
        d = a[piv][piv]
        if d > 0:
            pos += 1
        else:
            neg += 1
        rest = [k for k in range(n) if k != piv]
        a = [[a[i][j] - a[i][piv] * a[piv][j] / d for j in rest] for i in rest]
    return pos, neg


class IntegralLattice:
    """Even integral lattice given by its bilinear Gram matrix."""

    def __init__(self, gram, signature: tuple[int, int] | None = None):
        try:
            rows = [[int(x) for x in r] for r in gram]
        except (TypeError, ValueError) as exc:
            raise InvalidLatticeError(f"Gram entries must be integers: {exc}") from None
        r = len(rows)
        if r == 0 or any(len(row) != r for row in rows):
            raise InvalidLatticeError("Gram matrix must be square and non-empty")
        for i in range(r):
            if rows[i][i] % 2:
                raise InvalidLatticeError(f"odd diagonal entry at {i}: lattice is not even")
            for j in range(i):
                if rows[i][j] != rows[j][i]:
                    raise InvalidLatticeError("Gram matrix is not symmetric")
        det = int_det(rows)
        if det == 0:
            raise InvalidLatticeError("singular Gram matrix")
        self.gram = tuple(tuple(row) for row in rows)
        self.rank = r
        self.det = det
        sig = _inertia(rows)
        if signature is not None and tuple(signature) != sig:
            raise InvalidLatticeError(f"stated signature {signature} differs from computed {sig}")
        self.signature = sig

    def __repr__(self):
        return f"IntegralLattice(rank={self.rank}, signature={self.signature}, det={self.det})"

    def __eq__(self, other):
        return isinstance(other, IntegralLattice) and self.gram == other.gram

    def __hash__(self):
        return hash(self.gram)

    @property
    def b(self) -> int:
        return self.signature[0]

    @property
    def matrix(self) -> np.ndarray:
        big = max(abs(x) for row in self.gram for x in row)
        return np.array(self.gram, dtype=np.int64 if big < 2**31 else object)

    @property
    def float_gram(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.gram])

    def is_gspin(self) -> bool:
        return self.signature[1] == 2 and self.signature[0] >= 3

    def is_positive_definite(self) -> bool:
        return self.signature[1] == 0

    def Q(self, v) -> int:
        v = [int(x) for x in v]
        g = self.gram
        s = 0
        for i, vi in enumerate(v):
            if vi:
                s += g[i][i] // 2 * vi * vi
                for j in range(i + 1, self.rank):
                    s += g[i][j] * vi * v[j]
        return s

    def bilinear(self, v, w):
        return sum(v[i] * self.gram[i][j] * w[j] for i in range(self.rank) for j in range(self.rank))

    def direct_sum(self, other: IntegralLattice) -> IntegralLattice:
        r, s = self.rank, other.rank
        rows = [list(row) + [0] * s for row in self.gram]
        rows += [[0] * r + list(row) for row in other.gram]
        return IntegralLattice(rows)

    def sublattice(self, basis) -> IntegralLattice:
        """Lattice spanned by the integer row vectors of `basis`."""
        B = [[int(x) for x in row] for row in basis]
        G = self.gram
        n = self.rank
        GB = [[sum(G[i][k] * row[k] for k in range(n)) for i in range(n)] for row in B]
        return IntegralLattice([[sum(a[i] * gb[i] for i in range(n)) for gb in GB] for a in B])

    def to_text(self) -> str:
        return "\n".join([str(self.rank)] + [" ".join(map(str, row)) for row in self.gram]) + "\n"

    @classmethod
    def from_text(cls, text: str) -> IntegralLattice:
        lines = [ln.split("#")[0].strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln]
        try:
            r = int(lines[0])
            rows = [[int(x) for x in ln.split()] for ln in lines[1 : r + 1]]
        except (IndexError, ValueError) as exc:
            raise InvalidLatticeError(f"malformed lattice file: {exc}") from None
        if len(rows) != r or any(len(row) != r for row in rows):
            raise InvalidLatticeError("lattice file does not contain r rows of r integers")
        return cls(rows)

    @classmethod
    def load(cls, path) -> IntegralLattice:
        return cls.from_text(Path(path).read_text())


def hyperbolic_plane() -> IntegralLattice:
    return IntegralLattice([[0, 1], [1, 0]])


def diagonal(*entries: int) -> IntegralLattice:
    """Lattice with Gram diag(entries); entries must be even."""
    n = len(entries)
    return IntegralLattice([[entries[i] if i == j else 0 for j in range(n)] for i in range(n)])


def quadratic_diagonal(*coeffs: int) -> IntegralLattice:
    """Lattice of the form sum c_i x_i^2 (Gram diag(2c_i))."""
    return diagonal(*[2 * c for c in coeffs])


def fixture_L5() -> IntegralLattice:
    """U + U + <2>: signature (3,2), |L^v/L| = 2."""
    U = hyperbolic_plane()
    return U.direct_sum(U).direct_sum(diagonal(2))


def fixture_U3() -> IntegralLattice:
    """U + U + U: even unimodular of rank 6."""
    U = hyperbolic_plane()
    return U.direct_sum(U).direct_sum(U)


# ----------------------------------------------------------------------------
# discriminant group


@dataclass(frozen=True)
class DiscriminantGroup:
    elementary_divisors: tuple[int, ...]
    representatives: tuple[tuple[Fraction, ...], ...]
    q_values: tuple[Fraction, ...]
    gram: tuple[tuple[int, ...], ...] = field(repr=False, default=())

    @property
    def order(self) -> int:
        return math.prod(self.elementary_divisors)

    def q(self, v) -> Fraction:
        n = len(v)
        s = sum(v[i] * self.gram[i][j] * v[j] for i in range(n) for j in range(n)) / 2
        return s - math.floor(s)

    def p_part(self, p: int):
        """Generators (vector, order) of the p-primary part."""
        gens = []
        for d, v in zip(self.elementary_divisors, self.representatives):
            a = valuation(d, p) if d % p == 0 else 0
            if a:
                k = d // p**a
                gens.append((tuple(k * x for x in v), p**a))
        return gens


@lru_cache(maxsize=None)
def discriminant_group(lat: IntegralLattice) -> DiscriminantGroup:
    from sympy import Matrix
    from sympy.matrices.normalforms import smith_normal_decomp

    G = Matrix(lat.gram)
    S, U, _ = smith_normal_decomp(G)
    Uinv = U.inv()
    Ginv = rational_inverse(lat.gram)
    n = lat.rank
    divs, reps, qs = [], [], []
    for i in range(n):
        d = abs(int(S[i, i]))
        if d == 1:
            continue
        y = [int(Uinv[k, i]) for k in range(n)]
        v = tuple(sum(Ginv[a][k] * y[k] for k in range(n)) for a in range(n))
        divs.append(d)
        reps.append(v)
    grp = DiscriminantGroup(tuple(divs), tuple(reps), (), lat.gram)
    qs = tuple(grp.q(v) for v in reps)
    grp = DiscriminantGroup(tuple(divs), tuple(reps), qs, lat.gram)
    if grp.order != abs(lat.det):
        raise InvalidLatticeError("Smith form inconsistent with determinant")
    return grp


def has_isotropic_element(lat: IntegralLattice, p: int, size_cap: int = 10**6) -> bool:
    grp = discriminant_group(lat)
    gens = grp.p_part(p)
    if not gens:
        return False
    size = math.prod(o for _, o in gens)
    if size > size_cap:
        raise UnsupportedSizeError(f"p-part of order {size} exceeds exhaustive bound {size_cap}")
    G = lat.gram
    n = lat.rank
    k = len(gens)
    vecs = [g for g, _ in gens]

    def b(v, w):
        return sum(v[i] * G[i][j] * w[j] for i in range(n) for j in range(n))

    qv = [b(v, v) / 2 for v in vecs]
    bv = [[b(vecs[i], vecs[j]) for j in range(k)] for i in range(k)]
    den = 1
    for x in qv + [y for row in bv for y in row]:
        den = math.lcm(den, Fraction(x).denominator)
    qi = np.array([int(x * den) % den for x in qv], dtype=np.int64)
    bij = np.array([[int(y * den) % den for y in row] for row in bv], dtype=np.int64)
    grids = np.meshgrid(*[np.arange(o, dtype=np.int64) for _, o in gens], indexing="ij")
    cs = [g.ravel() for g in grids]
    tot = np.zeros(cs[0].shape, dtype=np.int64)
    for i in range(k):
        tot = (tot + (cs[i] * cs[i] % den) * qi[i]) % den
        for j in range(i + 1, k):
            tot = (tot + (cs[i] * cs[j] % den) * bij[i, j]) % den
    nonzero = np.zeros(cs[0].shape, dtype=bool)
    for c in cs:
        nonzero |= c != 0
    return bool(np.any((tot == 0) & nonzero))


# ----------------------------------------------------------------------------
# Jordan splitting


@dataclass(frozen=True)
class JordanBlock:
    """Block p^valuation * Q_j with Q_j(x) = u x^2 or a x^2 + b xy + c y^2."""

    valuation: int
    dim: int
    coeffs: tuple[int, ...]

    @property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        if self.dim == 1:
            return ((2 * self.coeffs[0],),)
        a, b, c = self.coeffs
        return ((2 * a, b), (b, 2 * c))


@dataclass(frozen=True)
class JordanSplitting:
    prime: int
    blocks: tuple[JordanBlock, ...]
    precision: int
    basis: tuple[tuple[Fraction, ...], ...] = field(repr=False, default=())

    @property
    def s0(self) -> int:
        return sum(1 for bl in self.blocks if bl.valuation == 0)

    @property
    def s0_dim(self) -> int:
        return sum(bl.dim for bl in self.blocks if bl.valuation == 0)

    @property
    def rank(self) -> int:
        return sum(bl.dim for bl in self.blocks)

    def valuations(self) -> tuple[int, ...]:
        return tuple(bl.valuation for bl in self.blocks)

    def dual_swap(self) -> JordanSplitting:
        """The auxiliary form Q' with nu'_j = 1 - nu_j (maximal case)."""
        if any(bl.valuation > 1 for bl in self.blocks):
            raise DomainError("Q' is defined only when every valuation is at most 1")
        blocks = tuple(JordanBlock(1 - bl.valuation, bl.dim, bl.coeffs) for bl in self.blocks)
        return JordanSplitting(self.prime, blocks, self.precision)


def _qval(x: Fraction, p: int) -> float:
    return math.inf if x == 0 else valuation(x, p)


@lru_cache(maxsize=None)
def jordan_decompose(lat: IntegralLattice, p: int, precision: int = 40) -> JordanSplitting:
    if precision < 1:
        raise DomainError("precision must be at least 1")
    n = lat.rank
    G = [[Fraction(x) for x in row] for row in lat.gram]
    basis = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]

    def gram_of(vs):
        Gv = [[sum(G[a][c] * v[c] for c in range(n)) for a in range(n)] for v in vs]
        return [[sum(w[a] * gv[a] for a in range(n)) for gv in Gv] for w in vs]

    remaining = list(range(n))
    blocks: list[JordanBlock] = []
    out_basis = []
    mod = p**precision
    while remaining:
        A = gram_of([basis[i] for i in remaining])
        k = len(remaining)
        half = Fraction(1, 2)
        dv = [_qval(A[i][i] * half, p) for i in range(k)]
        ov = {(i, j): _qval(A[i][j], p) for i in range(k) for j in range(i + 1, k)}
        t = min(dv + list(ov.values()))
        if t == math.inf:
            raise InvalidLatticeError("degenerate form in Jordan splitting")
        if t >= precision:
            raise PrecisionError(f"pivot valuation {t} at p={p} exceeds precision {precision}")
        t = int(t)
        pair = next(((i, j) for (i, j), val in sorted(ov.items()) if val == t), None)
        if p == 2 and pair is not None:
            piv = list(pair)
        else:
            i0 = next((i for i in range(k) if dv[i] == t), None)
            if i0 is None:
                i, j = pair
                gi, gj = remaining[i], remaining[j]
                basis[gi] = [x + y for x, y in zip(basis[gi], basis[gj])]
                A = gram_of([basis[r] for r in remaining])
                i0 = i
            piv = [i0]
        pidx = [remaining[i] for i in piv]
        block = [[A[i][j] for j in piv] for i in piv]
        binv = rational_inverse(block)
        for idx, gk in enumerate(remaining):
            if idx in piv:
                continue
            coup = [A[i][idx] for i in piv]
            x = [sum(binv[a][c] * coup[c] for c in range(len(piv))) for a in range(len(piv))]
            for a, gi in enumerate(pidx):
                if x[a]:
                    basis[gk] = [u - x[a] * w for u, w in zip(basis[gk], basis[gi])]
        scale = Fraction(p) ** t
        if len(piv) == 1:
            coeffs = (unit_mod(block[0][0] / 2 / scale, p, mod),)
        else:
            coeffs = (
                unit_mod(block[0][0] / 2 / scale, p, mod),
                unit_mod(block[0][1] / scale, p, mod),
                unit_mod(block[1][1] / 2 / scale, p, mod),
            )
        blocks.append(JordanBlock(t, len(piv), coeffs))
        out_basis.extend(tuple(basis[g]) for g in pidx)
        remaining = [g for g in remaining if g not in pidx]
    return JordanSplitting(p, tuple(blocks), precision, tuple(out_basis))


def is_maximal_at(lat: IntegralLattice, p: int, size_cap: int = 10**6) -> bool:
    split = jordan_decompose(lat, p)
    if any(bl.valuation > 1 for bl in split.blocks):
        return False
    return not has_isotropic_element(lat, p, size_cap)


# ----------------------------------------------------------------------------
# period points and the majorant


@dataclass(frozen=True, eq=False)
class PeriodPoint:
    """Negative definite plane span(u, w) with Q(u) = Q(w) = -1 and (u.w) = 0."""

    gram: np.ndarray
    u: np.ndarray
    w: np.ndarray
    tolerance: float = 1e-9

    def __post_init__(self):
        G = self.gram
        qu = self.u @ G @ self.u / 2
        qw = self.w @ G @ self.w / 2
        uw = self.u @ G @ self.w
        tol = self.tolerance
        if abs(qu + 1) > tol or abs(qw + 1) > tol or abs(uw) > tol:
            raise DomainError(f"period point not orthonormal: Q(u)={qu}, Q(w)={qw}, (u.w)={uw}")

    @classmethod
    def from_vectors(cls, lat: IntegralLattice, u, w, tolerance: float = 1e-9) -> PeriodPoint:
        """Gram-Schmidt inside span(u, w); the span must be negative definite."""
        G = lat.float_gram
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        if u.shape != (lat.rank,) or w.shape != (lat.rank,):
            raise DomainError("period vectors must have length r")
        plane = np.array([[u @ G @ u, u @ G @ w], [w @ G @ u, w @ G @ w]])
        if not (plane[0, 0] < 0 and np.linalg.det(plane) > 0):
            raise DomainError("span(u, w) is not negative definite")
        u = u / math.sqrt(-(u @ G @ u) / 2)
        w = w - (w @ G @ u) / (u @ G @ u) * u
        w = w / math.sqrt(-(w @ G @ w) / 2)
        return cls(G, u, w, tolerance)

    @classmethod
    def random(cls, lat: IntegralLattice, seed: int = 0, spread: float = 0.6) -> PeriodPoint:
        """A pseudo-random negative plane: the negative eigenspace tilted at random."""
        if lat.signature[1] < 2:
            raise DomainError("lattice has no negative definite plane")
        rng = np.random.default_rng(seed)
        G = lat.float_gram
        vals, vecs = np.linalg.eigh(G)
        neg = vecs[:, vals < 0][:, :2]
        pos = vecs[:, vals > 0]
        while True:
            tilt = rng.normal(scale=spread, size=(pos.shape[1], 2))
            mix = rng.normal(size=(2, 2))
            cand = (neg + pos @ tilt) @ mix
            u, w = cand[:, 0], cand[:, 1]
            try:
                return cls.from_vectors(lat, u, w)
            except DomainError:
                spread *= 0.5

    @classmethod
    def load(cls, lat: IntegralLattice, path) -> PeriodPoint:
        rows = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
        try:
            u = [float(x) for x in rows[0]]
            w = [float(x) for x in rows[1]]
        except (IndexError, ValueError) as exc:
            raise DomainError(f"malformed point file: {exc}") from None
        return cls.from_vectors(lat, u, w)

    def to_text(self) -> str:
        return "\n".join(" ".join(repr(float(x)) for x in vec) for vec in (self.u, self.w)) + "\n"

    def majorant(self) -> MajorantForm:
        a = self.gram @ self.u
        c = self.gram @ self.w
        return MajorantForm(self.gram + np.outer(a, a) + np.outer(c, c))


@dataclass(frozen=True, eq=False)
class MajorantForm:
    """Bilinear Gram of Q_x(l) = Q(l) - 2 Q(l_x)."""

    gram_real: np.ndarray

    def __post_init__(self):
        if np.linalg.eigvalsh(self.gram_real)[0] <= 0:
            raise DomainError("majorant is not positive definite")

    def value(self, lam) -> float:
        lam = np.asarray(lam, dtype=float)
        return float(lam @ self.gram_real @ lam / 2)


def project(pt: PeriodPoint, lam) -> tuple[float, float]:
    """(Q(l_x), Q(l_perp)) for the projection onto the plane of pt."""
    lam = np.asarray(lam, dtype=float)
    Gl = pt.gram @ lam
    bu = Gl @ pt.u
    bw = Gl @ pt.w
    q_x = -(bu * bu + bw * bw) / 4
    q = lam @ Gl / 2
    return float(q_x), float(q - q_x)


# ----------------------------------------------------------------------------
# enumeration


def fincke_pohst_shape(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(d, c) with v^T M v = sum_i d_i (v_i + sum_{j>i} c_ij v_j)^2."""
    R = np.linalg.cholesky(M).T
    d = np.diag(R) ** 2
    c = R / np.diag(R)[:, None]
    return d, np.triu(c, 1)


_SIEVE = np.zeros(2, np.int32)
SIEVE_CAP = 30_000_000


def _sieve(nmax: int) -> np.ndarray:
    global _SIEVE
    nmax = min(nmax, SIEVE_CAP)
    if _SIEVE.shape[0] <= nmax:
        _SIEVE = _kernels.smallest_prime_factors(max(nmax, 2 * _SIEVE.shape[0]))
    return _SIEVE


def _hyperbolic_pair(G) -> tuple[int, int, int] | None:
    n = len(G)
    for i in range(n):
        for j in range(i + 1, n):
            if G[i][i] == 0 and G[j][j] == 0 and abs(G[i][j]) == 1:
                return i, j, G[i][j]
    return None


@dataclass(eq=False)
class _ScanSetup:
    S: np.ndarray
    G: np.ndarray
    gu: np.ndarray
    gw: np.ndarray
    d: np.ndarray
    c: np.ndarray
    Minv: np.ndarray
    hyperbolic: bool


_SETUPS: dict = {}


def _scan_setup(lat: IntegralLattice, pt: PeriodPoint) -> _ScanSetup:
    key = (lat, id(pt))
    if key in _SETUPS and _SETUPS[key][0] is pt:
        return _SETUPS[key][1]
    n = lat.rank
    pair = _hyperbolic_pair(lat.gram) if n >= 3 else None
    if pair is not None:
        i, j, sgn = pair
        order = [i, j] + [k for k in range(n) if k not in (i, j)]
    else:
        # put a coordinate with nonzero diagonal innermost when possible
        nz = [k for k in range(n) if lat.gram[k][k] != 0]
        first = nz[0] if nz else 0
        order = [first] + [k for k in range(n) if k != first]
        sgn = 1
    S = np.zeros((n, n), dtype=np.int64)
    for new, old in enumerate(order):
        S[old, new] = 1
    if pair is not None and sgn == -1:
        S[:, 1] *= -1
    G0 = np.array(lat.gram, dtype=np.int64)
    G = S.T @ G0 @ S
    M = pt.majorant().gram_real
    Mp = S.T @ M @ S
    d, c = fincke_pohst_shape(Mp)
    setup = _ScanSetup(
        S=S, G=G, gu=S.T @ (pt.gram @ pt.u), gw=S.T @ (pt.gram @ pt.w),
        d=d, c=c, Minv=np.linalg.inv(Mp), hyperbolic=pair is not None,
    )
    _SETUPS[key] = (pt, setup)
    return setup


def scan_work_estimate(lat: IntegralLattice, pt: PeriodPoint, m: float, tmax: float) -> float:
    """Approximate number of outer enumeration nodes for a scan."""
    st = _scan_setup(lat, pt)
    bound = 2.0 * m * (1 + 2 * tmax)
    inner = 2 if st.hyperbolic else 1
    k = lat.rank - inner
    dets = np.prod(st.d[inner:])
    vol = math.pi ** (k / 2) / math.gamma(k / 2 + 1) * bound ** (k / 2) / math.sqrt(dets)
    return vol


@dataclass
class ScanResult:
    count: int
    count_t1: int
    A_mt: float
    A_er: float
    n_mt: int
    n_er: int
    n_nongeneric: int
    min_q: float
    shell_count: np.ndarray
    shell_h: np.ndarray
    shell_f: np.ndarray


def scan(lat, pt, m, tmax, *, nshell=0, t1=None, want_list=False, budget=5e10,
         underflow=1e-12, cap=1 << 16):
    """Run the compiled scan over {Q = m, -Q(l_x) <= tmax m}."""
    if m <= 0:
        empty = np.zeros((0, lat.rank), dtype=np.int64)
        if want_list:
            return empty, np.zeros(0)
        z = np.zeros(max(nshell, 1))
        return ScanResult(0, 0, 0.0, 0.0, 0, 0, 0, math.inf, z, z.copy(), z.copy())
    st = _scan_setup(lat, pt)
    est = scan_work_estimate(lat, pt, m, tmax)
    if est > budget:
        raise BudgetExceededError("enumeration nodes", est, budget)
    bound = 2.0 * m * (1 + 2 * tmax)
    if st.hyperbolic:
        fx = np.zeros(lat.rank)
        fx[0] = 1
        fx[2:] = st.G[1, 2:]
        fy = np.zeros(lat.rank)
        fy[1] = 1
        fy[2:] = st.G[0, 2:]
        xmax = int(math.sqrt(bound * fx @ st.Minv @ fx) * (1 + 1e-9)) + 1
        ymax = int(math.sqrt(bound * fy @ st.Minv @ fy) * (1 + 1e-9)) + 1
        spf = _sieve(xmax * ymax)
    else:
        xmax = ymax = 0
        spf = np.zeros(2, np.int32)
    thresh = underflow * m
    t1 = tmax if t1 is None else t1
    while True:
        out, qout, stats, sn, sh, sf = _kernels.scan_norm(
            st.d, st.c, st.G, st.gu, st.gw, int(m), float(tmax), st.hyperbolic, spf,
            xmax, ymax, want_list, cap, int(nshell), float(t1), float(thresh), int(lat.b),
        )
        if not want_list or stats[0] <= cap:
            break
        cap = int(stats[0]) + 16
    if want_list:
        cnt = int(stats[0])
        vecs = out[:cnt] @ st.S.T
        order = np.lexsort(vecs.T[::-1])
        return vecs[order], qout[:cnt][order]
    return ScanResult(
        int(stats[0]), int(stats[1]), float(stats[2]), float(stats[3]), int(stats[4]),
        int(stats[5]), int(stats[6]), float(stats[7]), sn, sh, sf,
    )


def enumerate_representations(lat: IntegralLattice, pt: PeriodPoint, m: int, T: float,
                              budget: float = 5e10) -> np.ndarray:
    """All l with Q(l) = m and -Q(l_x) <= T m, sorted lexicographically."""
    if lat.signature[1] != 2:
        raise DomainError("enumeration needs signature (b, 2)")
    vecs, _ = scan(lat, pt, m, T, want_list=True, budget=budget)
    return vecs


def short_vectors(gram, bound: float, cap: int = 1 << 16, max_count: int = 50_000_000):
    """All integer v with v^T G v <= bound for a positive definite real Gram G."""
    M = np.asarray(gram, dtype=float)
    d, c = fincke_pohst_shape(M)
    while True:
        out, cnt = _kernels.fp_short(d, c, float(bound), cap)
        if cnt <= cap:
            return out[:cnt]
        if cnt > max_count:
            raise BudgetExceededError("short vectors", cnt, max_count)
        cap = cnt + 16


@dataclass(frozen=True)
class ReducedLattice:
    """LLL-reduced basis U (rows, original coordinates) with its exact Gram."""

    U: tuple[tuple[int, ...], ...]
    gram: tuple[tuple[int, ...], ...]

    def float_gram(self) -> np.ndarray:
        return np.array([[float(x) for x in row] for row in self.gram])

    def to_original(self, coeffs) -> list[int]:
        n = len(self.U)
        return [sum(int(coeffs[i]) * self.U[i][j] for i in range(n)) for j in range(n)]


@lru_cache(maxsize=4096)
def lll_reduce(lat: IntegralLattice) -> ReducedLattice:
    if not lat.is_positive_definite():
        raise DomainError("LLL reduction needs a positive definite lattice")
    U, G = lll_gram(lat.gram)
    return ReducedLattice(tuple(map(tuple, U)), tuple(map(tuple, G)))


def _exact_norms(gram, vecs) -> list[int]:
    """v^T G v for integer rows, exact (Python ints)."""
    n = len(gram)
    out = []
    for v in vecs:
        v = [int(x) for x in v]
        out.append(sum(v[i] * gram[i][j] * v[j] for i in range(n) if v[i] for j in range(n) if v[j]))
    return out


def vectors_up_to(lat: IntegralLattice, qmax, strict: bool = False):
    """Exact list of (v, Q(v)) with Q(v) <= qmax (or < qmax), v != 0, original coordinates."""
    red = lll_reduce(lat)
    fg = red.float_gram()
    cand = short_vectors(fg, 2.0 * float(qmax) * (1 + 1e-9) + 1e-6)
    res = []
    for v, nv in zip(cand, _exact_norms(red.gram, cand)):
        q = nv // 2
        if q == 0:
            continue
        if q < qmax or (q == qmax and not strict):
            res.append((tuple(red.to_original(v)), q))
    return res


_INT_SAFE = 2**31


def theta_counts(lat: IntegralLattice, N: int) -> np.ndarray:
    """c[q] = #{v : Q(v) = q} for 0 <= q <= N (c[0] = 1), positive definite lat."""
    red = lll_reduce(lat)
    N = int(N)
    if max(abs(x) for row in red.gram for x in row) < _INT_SAFE and N < _INT_SAFE:
        d, c = fincke_pohst_shape(red.float_gram())
        return _kernels.fp_theta(d, c, np.array(red.gram, dtype=np.int64), 2.0 * N, N)
    # huge entries: few short vectors, count them exactly in Python
    hist = np.zeros(N + 1, np.int64)
    hist[0] = 1
    for _, q in vectors_up_to(lat, N):
        hist[q] += 1
    return hist


def _rank_increase(echelon: list[list[Fraction]], v) -> bool:
    """Try to add v to the echelon rows; True if it was independent."""
    w = [Fraction(int(x)) for x in v]
    for row in echelon:
        piv = next(i for i, x in enumerate(row) if x != 0)
        if w[piv] != 0:
            f = w[piv] / row[piv]
            w = [a - f * b for a, b in zip(w, row)]
    if any(x != 0 for x in w):
        echelon.append(w)
        return True
    return False


def successive_minima(lat: IntegralLattice):
    """(mu, a, mu_sq): minima mu_i = sqrt(min Q), a_i = prod_{j<=i} mu_j, a_0 = 1."""
    if not lat.is_positive_definite():
        raise DomainError("successive minima need a positive definite lattice")
    red = lll_reduce(lat)
    r = lat.rank
    basis_q = sorted(red.gram[i][i] // 2 for i in range(r))
    fg = red.float_gram()
    bound_q = basis_q[0]
    while True:
        cand = short_vectors(fg, 2.0 * bound_q * (1 + 1e-9) + 1e-6)
        norms = _exact_norms(red.gram, cand)
        items = sorted((nv // 2, tuple(int(x) for x in v)) for v, nv in zip(cand, norms) if nv)
        echelon: list[list[Fraction]] = []
        found: list[int] = []
        for q, v in items:
            if q > bound_q or len(found) == r:
                break
            if _rank_increase(echelon, v):
                found.append(q)
        if len(found) == r:
            break
        # lambda_{f+1} > bound_q, and the sorted reduced basis norms bound it from above
        bound_q = basis_q[len(found)]
    if len(found) < r:
        raise DomainError("failed to find r independent vectors")
    mu = tuple(math.sqrt(q) for q in found)
    a = [1.0]
    for x in mu:
        a.append(a[-1] * x)
    return mu, tuple(a), tuple(found)


def brute_force_box(lat: IntegralLattice, pt: PeriodPoint, m: int, T: float, box: int) -> np.ndarray:
    """Oracle: scan the box |l|_inf <= box directly."""
    n = lat.rank
    G = np.array(lat.gram, dtype=np.int64)
    rng = np.arange(-box, box + 1)
    pts = np.array(list(product(rng, repeat=n)), dtype=np.int64)
    q = np.einsum("ij,jk,ik->i", pts, G, pts) // 2
    pts = pts[q == m]
    if len(pts) == 0:
        return pts
    Gl = pts @ pt.gram
    qx = -((Gl @ pt.u) ** 2 + (Gl @ pt.w) ** 2) / 4
    pts = pts[-qx <= T * m]
    order = np.lexsort(pts.T[::-1])
    return pts[order]
