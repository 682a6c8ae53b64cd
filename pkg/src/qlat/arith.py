"""Integer and rational helpers shared by the lattice modules."""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

from sympy import factorint, primerange


def valuation(n, p: int) -> int:
    """p-adic valuation of a nonzero integer or Fraction."""
    if n == 0:
        raise ValueError("valuation of zero")
    if isinstance(n, Fraction):
        return valuation(n.numerator, p) - valuation(n.denominator, p)
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def unit_mod(x: Fraction, p: int, modulus: int) -> int:
    """Reduce a p-integral rational into Z/modulus (modulus a power of p)."""
    x = Fraction(x)
    return x.numerator * pow(x.denominator, -1, modulus) % modulus


@lru_cache(maxsize=None)
def prime_factors(n: int) -> tuple[int, ...]:
    n = abs(n)
    if n <= 1:
        return ()
    return tuple(sorted(factorint(n)))


def primes_upto(n: int) -> list[int]:
    return list(primerange(2, n + 1))


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    # Euler's criterion
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def kronecker(d: int, p: int) -> int:
    """Kronecker symbol (d | p) for a prime p."""
    if p == 2:
        if d % 2 == 0:
            return 0
        return 1 if d % 8 in (1, 7) else -1
    return legendre(d, p)


def squarefree_part(d: int) -> int:
    if d == 0:
        raise ValueError("zero has no squarefree part")
    sign = -1 if d < 0 else 1
    s = 1
    for q, e in factorint(abs(d)).items():
        if e % 2:
            s *= q
    return sign * s


def fundamental_discriminant(d: int) -> int:
    """Discriminant of Q(sqrt d); 1 when d is a square."""
    s = squarefree_part(d)
    if s == 1:
        return 1
    return s if s % 4 == 1 else 4 * s


def is_square(n: int) -> bool:
    return n >= 0 and isqrt(n) ** 2 == n


def int_det(rows) -> int:
    """Bareiss fraction-free determinant of an integer matrix."""
    a = [[int(x) for x in r] for r in rows]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rational_inverse(rows) -> list[list[Fraction]]:
    """Gauss-Jordan inverse over Q."""
    n = len(rows)
    a = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)]
         for i, r in enumerate(rows)]
    for c in range(n):
        piv = next(i for i in range(c, n) if a[i][c] != 0)
        a[c], a[piv] = a[piv], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [r[n:] for r in a]


def hnf_rows(gens) -> list[list[int]]:
    """Row Hermite normal form; returns the nonzero rows (a basis of the row span)."""
    a = [[int(x) for x in r] for r in gens if any(r)]
    if not a:
        return []
    ncols = len(a[0])
    row = 0
    for c in range(ncols):
        # gcd-eliminate column c below `row`
        while True:
            nz = [i for i in range(row, len(a)) if a[i][c] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(a[i][c]))
            a[row], a[piv] = a[piv], a[row]
            done = True
            for i in range(row + 1, len(a)):
                if a[i][c]:
                    q = a[i][c] // a[row][c]
                    a[i] = [x - q * y for x, y in zip(a[i], a[row])]
                    if a[i][c]:
                        done = False
            if done:
                break
        if row < len(a) and a[row][c] != 0:
            if a[row][c] < 0:
                a[row] = [-x for x in a[row]]
            for i in range(row):
                q = a[i][c] // a[row][c]
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[row])]
            row += 1
            if row == len(a):
                break
    return [r for r in a[:row]]


def lll_gram(gram, delta=Fraction(99, 100)):
    """LLL-reduce a positive definite integer Gram matrix.

    Returns (U, G') with U unimodular (rows are the new basis in old coordinates)
    and G' = U G U^T. Exact rational Gram-Schmidt, so it is safe for huge entries.
    """
    n = len(gram)
    G = [[int(x) for x in r] for r in gram]
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    mu = [[Fraction(0)] * n for _ in range(n)]
    B = [Fraction(0)] * n

    def gso(k):
        for j in range(k):
            s = Fraction(G[k][j])
            for i in range(j):
                s -= mu[j][i] * mu[k][i] * B[i]
            mu[k][j] = s / B[j]
        s = Fraction(G[k][k])
        for i in range(k):
            s -= mu[k][i] * mu[k][i] * B[i]
        B[k] = s

    def red(k, l):
        q = round(mu[k][l])
        if q == 0:
            return
        U[k] = [x - q * y for x, y in zip(U[k], U[l])]
        for j in range(l):
            mu[k][j] -= q * mu[l][j]
        mu[k][l] -= q

    if n == 0:
        return U, G
    gso(0)
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            gso(k)
        red(k, k - 1)
        _fix_gram(G, U, gram, k)
        if B[k] < (delta - mu[k][k - 1] ** 2) * B[k - 1]:
            U[k], U[k - 1] = U[k - 1], U[k]
            G[k], G[k - 1] = G[k - 1], G[k]
            for row in G:
                row[k], row[k - 1] = row[k - 1], row[k]
            kmax = k - 2
            k = max(1, k - 1)
            if k == 1 and kmax < 0:
                gso(0)
                kmax = 0
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            _fix_gram(G, U, gram, k)
            k += 1
    return U, G


def _fix_gram(G, U, gram, k):
    # exact recomputation of row/column k of U G U^T
    n = len(G)
    Gu = [sum(int(gram[a][b]) * U[k][b] for b in range(n) if U[k][b]) for a in range(n)]
    for j in range(n):
        v = sum(U[j][a] * Gu[a] for a in range(n) if U[j][a])
        G[k][j] = v
        G[j][k] = v
