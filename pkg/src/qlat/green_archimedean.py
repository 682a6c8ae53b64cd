"""Archimedean side: hypergeometric kernels, the measure of Omega_T, the
singular sum A(m, x) and the regularized pieces of the Green function.

Throughout, a vector l with Q(l) = m is summarized by t = -Q(l_x)/m >= 0 and
z = 1/(1 + t). The measure mu_inf on {Q = 1} pushes forward to the density
rho(t) = C_L (b/2) (1 + t)^(b/2 - 1) dt, where C_L is the coefficient scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.spatial import cKDTree

from . import _kernels
from .eisenstein_series import a_of_m, bprime_ratio, coefficient_scale, weight
from .errors import DomainError, NonGenericPointError
from .lattice_core import IntegralLattice, PeriodPoint, discriminant_group, scan


# ----------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class HyperKernel:
    """F(s, z) = 2F1(s - 1 + k/2, s + 1 - k/2; 2s; z) and G = (F - 1)/z."""

    s: float
    k: float
    tol: float = 1e-14
    max_terms: int = 100_000

    def _params(self):
        return self.s - 1 + self.k / 2, self.s + 1 - self.k / 2, 2 * self.s

    def _ratio(self, n: int, z: float) -> float:
        a, b, c = self._params()
        return (a + n) * (b + n) / ((c + n) * (n + 1)) * z

    def _tail_ratio(self, n: int, z: float) -> float:
        # the term ratio is a rational function of n tending to z; sample its sup on [n, inf)
        ns = n + np.concatenate([np.arange(64), np.geomspace(64, 1e9, 64)])
        a, b, c = self._params()
        vals = np.abs((a + ns) * (b + ns) / ((c + ns) * (ns + 1)) * z)
        return max(float(vals.max()), abs(z))

    def series(self, z: float) -> tuple[float, float]:
        """(G(s, z), certified bound on the truncation error)."""
        if abs(z) >= 1:
            raise DomainError("the hypergeometric series needs |z| < 1")
        # G = sum_{n>=1} t_n z^(n-1) with t_n the F coefficients
        term = self._ratio(0, 1.0)  # t_1 (z-free)
        total = 0.0
        zn = 1.0
        for n in range(1, self.max_terms):
            cur = term * zn
            total += cur
            rho = self._tail_ratio(n, z)
            if rho < 1:
                bound = abs(cur) * rho / (1 - rho)
                if bound <= self.tol * max(1.0, abs(total)):
                    return total, bound
            term *= self._ratio(n, 1.0)
            zn *= z
        raise DomainError(f"series did not reach tolerance at z={z}")

    def G(self, z: float) -> float:
        return self.series(z)[0]

    def F(self, z: float) -> float:
        return 1 + z * self.G(z)


def hyper_G(kernel: HyperKernel, z: float, eps: float = 1e-3) -> float:
    if abs(z) > 1 - eps:
        raise DomainError("z too close to 1: use the logarithmic decomposition")
    return kernel.G(z)


def G_half(z: float, b: int) -> float:
    """G(k/2, z) for k = 1 + b/2, valid on all of [0, 1)."""
    return _kernels.g_half(float(z), int(b))


# ----------------------------------------------------------------------------
# volumes


def volume_omega(lat: IntegralLattice, T: float) -> float:
    if T < 0:
        raise DomainError("T must be non-negative")
    return coefficient_scale(lat) * ((1 + T) ** (lat.b / 2) - 1)


def shell_volume(lat: IntegralLattice, N: int) -> float:
    return volume_omega(lat, N + 1) - volume_omega(lat, N)


def _covolume_factor(lat: IntegralLattice) -> float:
    # Lebesgue measure with covolume 1 for L, relative to an orthonormal frame
    return 2 ** (lat.rank / 2) / math.sqrt(discriminant_group(lat).order)


def _ball_volume(b: int) -> float:
    return math.pi ** (b / 2) / math.gamma(b / 2 + 1)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def volume_omega_mc(lat: IntegralLattice, T: float, samples: int = 10**7, seed: int = 0,
                    eps: float = 0.1, chunk: int = 10**6) -> tuple[float, float]:
    """Monte Carlo estimate of mu_L({|Q - 1| < eps, -Q(l_x) < T}) / (2 eps).

    Orthonormal coordinates (x in P, y in P-perp): the region is
    |y|^2 - |x|^2 in (1 - eps, 1 + eps), |x|^2 < T. Samples are uniform in the
    product of the disk |x|^2 < T and the ball |y|^2 < 1 + T + eps.
    Returns (estimate, standard error).
    """
    b = lat.b
    rng = _rng(seed)
    R2 = 1 + T + eps
    box = math.pi * T * _ball_volume(b) * R2 ** (b / 2)
    hits = 0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        # only squared radii matter: uniform in a disk, |x|^2 ~ U; in a b-ball, |y|^2 ~ U^(2/b)
        x2 = T * rng.random(n)
        y2 = R2 * rng.random(n) ** (2 / b)
        hits += int(np.count_nonzero(np.abs(y2 - x2 - 1) < eps))
        done += n
    frac = hits / samples
    scale = _covolume_factor(lat) * box / (2 * eps)
    return scale * frac, scale * math.sqrt(frac * (1 - frac) / samples)


def h_integral_closed(lat: IntegralLattice, s: float) -> float:
    """Integral of h_s = (1 - Q(l_x))^-(k-1+s) against mu_inf; equals (b/2) C_L / s."""
    if s <= 0:
        raise DomainError("the h-integral diverges for s <= 0")
    return lat.b / 2 * coefficient_scale(lat) / s


def h_integral_check(lat: IntegralLattice, s: float, samples: int = 10**7, seed: int = 0,
                     eps: float = 0.05, chunk: int = 10**6) -> tuple[float, float]:
    """(Monte Carlo, closed form) for the integral of h_s over {Q = 1}.

    x in P is drawn from the density (s/pi)(1 + |x|^2)^(-1-s); given x, the
    value |y|^2 is drawn uniformly from a band of width 4 eps around 1 + |x|^2
    and the eps-shell indicator is averaged, so the estimator follows the
    defining limit while keeping a bounded weight.
    """
    closed = h_integral_closed(lat, s)
    b = lat.b
    k = weight(lat)
    rng = _rng(seed)
    acc = 0.0
    done = 0
    while done < samples:
        n = min(chunk, samples - done)
        # inverse CDF of |x|^2 =: u under the importance density: P(u > v) = (1+v)^-s
        u = rng.random(n) ** (-1 / s) - 1
        q = s / math.pi * (1 + u) ** (-1 - s)
        y2 = 1 + u + eps * (4 * rng.random(n) - 2)
        inside = np.abs(y2 - 1 - u) < eps
        # Lebesgue density of |y|^2 is V_b (b/2) Q^(b/2-1); band width 4 eps
        fiber = 4 * eps * _ball_volume(b) * (b / 2) * y2 ** (b / 2 - 1) * inside / (2 * eps)
        h = (1 + u) ** (-(k - 1 + s))
        acc += float(np.sum(h * fiber / q))
        done += n
    mc = _covolume_factor(lat) * acc / samples
    return mc, closed


# ----------------------------------------------------------------------------
# sums over representations


@dataclass
class ArchimedeanReport:
    m: int
    A: float
    A_mt: float
    A_er: float
    vector_count: int
    phi_tilde: float | None = None
    R_x: float | None = None
    Phi: float | None = None
    uncertainty: float | None = None
    table: list = field(default_factory=list, repr=False)


UNDERFLOW = 1e-12


def _checked_scan(lat, pt, m, tmax, **kw):
    res = scan(lat, pt, m, tmax, underflow=UNDERFLOW, **kw)
    if res.n_nongeneric:
        raise NonGenericPointError(
            f"{res.n_nongeneric} vectors of norm {m} have |Q(l_x)| below {UNDERFLOW} m")
    return res


def A_of_m(lat: IntegralLattice, pt: PeriodPoint, m: int, with_table: bool = False) -> ArchimedeanReport:
    """A(m, x) = 2 sum log(m/|Q(l_x)|) over Q(l) = m, |Q(l_x)| <= m."""
    if not lat.is_gspin():
        raise DomainError("A(m, x) needs signature (b, 2)")
    if m <= 0:
        return ArchimedeanReport(m, 0.0, 0.0, 0.0, 0)
    res = _checked_scan(lat, pt, m, 1.0)
    rep = ArchimedeanReport(m, res.A_mt + res.A_er, res.A_mt, res.A_er, res.count)
    if with_table:
        vecs, qs = scan(lat, pt, m, 1.0, want_list=True)
        rep.table = [(tuple(int(c) for c in v), -float(q)) for v, q in zip(vecs, qs)]
    return rep


def _phi_tilde_tail(lat: IntegralLattice, start: float) -> float:
    """Integral of z^k G(k/2, z) rho(t) over t > start (per unit a(m))."""
    b = lat.b
    k = weight(lat)
    CL = coefficient_scale(lat)

    def f(t):
        z = 1 / (1 + t)
        return z**k * _kernels.g_half(z, b) * CL * b / 2 * (1 + t) ** (b / 2 - 1)

    val, _ = integrate.quad(f, start, np.inf, limit=200)
    return val


def phi_parts(lat: IntegralLattice, pt: PeriodPoint, m: int, shellmax: int = 8,
              P_trunc: int | None = None) -> tuple[float, float, float, ArchimedeanReport]:
    """(phi_tilde, R_x, uncertainty, report) with shells Theta_N, N < shellmax.

    phi_tilde sums z^k G(k/2, z) exactly over t <= shellmax and uses the
    expected density a(m) rho(t) beyond. R_x sums, shell by shell, the
    h_0-weighted count minus a(m) times the h_0-integral of the shell; the
    part past shellmax has mean zero and its size is estimated from the
    fluctuation of the last computed shells.
    """
    if not lat.is_gspin():
        raise DomainError("phi parts need signature (b, 2)")
    if m <= 0:
        return 0.0, 0.0, 0.0, ArchimedeanReport(m, 0.0, 0.0, 0.0, 0)
    b = lat.b
    res = _checked_scan(lat, pt, m, float(shellmax), nshell=shellmax, t1=1.0)
    est = a_of_m(lat, m, P_trunc)
    a = est.a_value
    CL = coefficient_scale(lat)
    phi_tilde = 4 / b * (float(res.shell_f.sum()) + a * _phi_tilde_tail(lat, shellmax))
    N = np.arange(shellmax)
    expected_h = a * CL * b / 2 * np.log((N + 2) / (N + 1))
    disc = res.shell_h - expected_h
    R_x = 4 / b * float(disc.sum())
    last = disc[shellmax // 2:]
    tail_unc = 4 / b * float(np.abs(last).mean()) * len(last) if len(last) else 0.0
    a_unc = 4 / b * a * est.trunc_error * (CL * b / 2 * math.log(shellmax + 1)
                                           + _phi_tilde_tail(lat, shellmax))
    rep = ArchimedeanReport(m, res.A_mt + res.A_er, res.A_mt, res.A_er, res.count_t1,
                            phi_tilde=phi_tilde, R_x=R_x, uncertainty=tail_unc + a_unc)
    return phi_tilde, R_x, tail_unc + a_unc, rep


def archimedean_report(lat: IntegralLattice, pt: PeriodPoint, D: int, m: int, kappa: float = 0.0,
                       shellmax: int = 8, P_trunc: int | None = None) -> ArchimedeanReport:
    """Full report including Phi_m(x) = phi_tilde + R_x - |c(m)| (b'/b ratio)."""
    phi_tilde, R_x, unc, rep = phi_parts(lat, pt, m, shellmax, P_trunc)
    est = a_of_m(lat, m, P_trunc)
    ratio = bprime_ratio(lat, D, m, kappa)
    rep.Phi = phi_tilde + R_x - abs(est.c_value) * ratio
    rep.uncertainty = unc + abs(est.c_value) * est.trunc_error * abs(ratio)
    return rep


def Phi_m(lat: IntegralLattice, pt: PeriodPoint, D: int, m: int, kappa: float = 0.0,
          shellmax: int = 8) -> float:
    return archimedean_report(lat, pt, D, m, kappa, shellmax).Phi


def count_region(lat: IntegralLattice, pt: PeriodPoint, m: int, T: float) -> int:
    """#{l : Q(l) = m, -Q(l_x) <= T m}."""
    return _checked_scan(lat, pt, m, float(T)).count


def equidist_ratio(lat: IntegralLattice, pt: PeriodPoint, m: int, T1: float, T2: float) -> float:
    """count(m, T1) / count(m, T2); compare with volume_omega(T1)/volume_omega(T2)."""
    if not 0 < T1 <= T2:
        raise DomainError("need 0 < T1 <= T2")
    res = _checked_scan(lat, pt, m, T2, t1=T1)
    if res.count == 0:
        raise DomainError(f"no vectors of norm {m} in Omega_{T2}: ratio undefined")
    return res.count_t1 / res.count


def equidist_target(lat: IntegralLattice, T1: float, T2: float) -> float:
    return volume_omega(lat, T1) / volume_omega(lat, T2)


# ----------------------------------------------------------------------------
# sphere pairing and bad m


def _plane_coords(lat: IntegralLattice, pt: PeriodPoint, vecs: np.ndarray):
    """(q, Y): q = -Q(v_x) and Y = Euclidean coordinates of v_perp."""
    G = lat.float_gram
    u = np.asarray(pt.u)
    w = np.asarray(pt.w)
    V = np.asarray(vecs, dtype=float)
    al = -(V @ (G @ u)) / 2
    be = -(V @ (G @ w)) / 2
    q = al**2 + be**2
    perp = V - np.outer(al, u) - np.outer(be, w)
    R = np.linalg.cholesky(pt.majorant().gram_real / 2).T
    return q, perp @ R.T


@dataclass(frozen=True)
class SpherePair:
    v: tuple[int, ...]
    v2: tuple[int, ...]
    w: tuple[int, ...]
    q_perp: float
    q_x: float


def sphere_pair(lat: IntegralLattice, pt: PeriodPoint, vectors, exhaustive_max: int = 1000) -> SpherePair:
    """Pair (v, v') minimizing Q(w_perp) for w = v - v'."""
    vecs = np.asarray(vectors, dtype=np.int64)
    if len(vecs) < 2:
        raise DomainError("need at least two vectors")
    q, Y = _plane_coords(lat, pt, vecs)
    if len(vecs) <= exhaustive_max:
        d2 = ((Y[:, None, :] - Y[None, :, :]) ** 2).sum(axis=2)
        d2[np.diag_indices(len(vecs))] = np.inf
        i, j = np.unravel_index(int(np.argmin(d2)), d2.shape)
    else:
        dist, idx = cKDTree(Y).query(Y, k=2)
        i = int(np.argmin(dist[:, 1]))
        j = int(idx[i, 1])
    i, j = sorted((int(i), int(j)))
    w = vecs[i] - vecs[j]
    qw, Yw = _plane_coords(lat, pt, w[None, :])
    out = SpherePair(tuple(map(int, vecs[i])), tuple(map(int, vecs[j])), tuple(map(int, w)),
                     float((Yw**2).sum()), -float(qw[0]))
    # |Q(w_x)| <= 4 max(|Q(v_x)|, |Q(v'_x)|)
    assert abs(out.q_x) <= 4 * max(q[i], q[j]) * (1 + 1e-9) + 1e-12
    return out


def classify_bad(lat: IntegralLattice, pt: PeriodPoint, X: int) -> list[int]:
    """m in [X, 2X) with A_er(m) > m^(b/2)."""
    bad = []
    for m in range(X, 2 * X):
        res = _checked_scan(lat, pt, m, 1.0)
        if res.A_er > m ** (lat.b / 2):
            bad.append(m)
    return bad
