"""Compiled inner loops: ellipsoid enumeration and per-vector accumulation.

Coordinates are ordered so that level 0 is the innermost one. The positive
definite form is given in Fincke-Pohst shape:
    N(v) = sum_i d[i] * (v[i] + sum_{j>i} c[i, j] v[j])**2.
"""

import math

import numpy as np
from numba import njit

FLOAT_SLACK = 1e-9


@njit(cache=True)
def g_half(z, b):
    """G(k/2, z) = sum_{n>=1} (k-1)/(n+k-1) z^(n-1) with k = 1 + b/2."""
    a = 0.5 * b
    if z < 0.5:
        total = 0.0
        zn = 1.0
        for n in range(1, 400):
            term = a / (n + a) * zn
            total += term
            if term < 1e-18 * total:
                break
            zn *= z
        return total
    # closed form of Phi(z) = sum_{n>=0} z^n / (n + a)
    if b % 2 == 0:
        ia = b // 2
        s = -math.log1p(-z)
        zi = 1.0
        for i in range(1, ia):
            zi *= z
            s -= zi / i
        phi = s / z ** ia
    else:
        j = (b - 1) // 2
        y = math.sqrt(z)
        s = math.atanh(y)
        yi = y
        for i in range(j):
            s -= yi / (2 * i + 1)
            yi *= y * y
        phi = 2.0 * s / y ** b
    return a / z * (phi - 1.0 / a)


@njit(cache=True)
def _init_level(i, v, upper, center, partial, d, c, bound):
    n = v.shape[0]
    s = 0.0
    for j in range(i + 1, n):
        s += c[i, j] * v[j]
    center[i] = -s
    rem = (bound - partial[i + 1]) / d[i]
    if rem < 0.0:
        v[i] = 1
        upper[i] = 0
        return
    r = math.sqrt(rem)
    v[i] = math.ceil(center[i] - r)
    upper[i] = math.floor(center[i] + r)


@njit(cache=True)
def fp_short(d, c, bound, cap):
    """All integer v with N(v) <= bound (including 0). Returns (rows, count)."""
    n = d.shape[0]
    bound = bound * (1.0 + FLOAT_SLACK) + FLOAT_SLACK
    out = np.zeros((cap, n), np.int64)
    v = np.zeros(n, np.int64)
    upper = np.zeros(n, np.int64)
    center = np.zeros(n)
    partial = np.zeros(n + 1)
    count = 0
    i = n - 1
    _init_level(i, v, upper, center, partial, d, c, bound)
    while True:
        if v[i] > upper[i]:
            i += 1
            if i == n:
                break
            v[i] += 1
            continue
        diff = v[i] - center[i]
        partial[i] = partial[i + 1] + d[i] * diff * diff
        if i == 0:
            if count < cap:
                out[count, :] = v
            count += 1
            v[0] += 1
            continue
        i -= 1
        _init_level(i, v, upper, center, partial, d, c, bound)
    return out, count


@njit(cache=True)
def _divisors(x, spf, buf):
    cnt = 1
    buf[0] = 1
    while x > 1:
        if x < spf.shape[0]:
            q = spf[x]
        else:
            q = x
            f = 2
            while f * f <= x:
                if x % f == 0:
                    q = f
                    break
                f += 1
        e = 0
        while x % q == 0:
            x //= q
            e += 1
        cur = cnt
        pk = 1
        for _ in range(e):
            pk *= q
            for t in range(cur):
                buf[cnt] = buf[t] * pk
                cnt += 1
    return cnt


@njit(cache=True)
def smallest_prime_factors(nmax):
    spf = np.zeros(nmax + 1, np.int32)
    for i in range(2, nmax + 1):
        if spf[i] == 0:
            spf[i] = i
            if i * i <= nmax:
                for j in range(i * i, nmax + 1, i):
                    if spf[j] == 0:
                        spf[j] = i
    return spf


@njit(cache=True)
def _quad(v, G):
    n = v.shape[0]
    s = 0
    for i in range(n):
        if v[i] != 0:
            s += (G[i, i] // 2) * v[i] * v[i]
            for j in range(i + 1, n):
                s += G[i, j] * v[i] * v[j]
    return s


@njit(cache=True)
def _emit(v, wt, gu, gw, m, tmax, thresh, b, kk, nshell, t1,
          want_list, out, qout, stats, shell_n, shell_h, shell_f):
    s1 = 0.0
    s2 = 0.0
    for j in range(v.shape[0]):
        s1 += gu[j] * v[j]
        s2 += gw[j] * v[j]
    q = 0.25 * (s1 * s1 + s2 * s2)
    t = q / m
    if t > tmax:
        return
    idx = int(stats[0])
    stats[0] += wt
    if want_list:
        if idx < out.shape[0]:
            out[idx, :] = v
            qout[idx] = q
        if wt == 2.0 and idx + 1 < out.shape[0]:
            out[idx + 1, :] = -v
            qout[idx + 1] = q
        return
    if t <= t1:
        stats[1] += wt
    if q <= m:
        if q >= 1.0:
            stats[2] += wt * 2.0 * math.log(m / q)
            stats[4] += wt
        elif q > thresh:
            stats[3] += wt * 2.0 * math.log(m / q)
            stats[5] += wt
        else:
            stats[6] += wt
    if q < stats[7]:
        stats[7] = q
    if q <= thresh:
        return
    sh = int(math.ceil(t)) - 1
    if sh < 0:
        sh = 0
    if sh < nshell:
        z = 1.0 / (1.0 + t)
        shell_n[sh] += wt
        shell_h[sh] += wt * z ** (0.5 * b)
        shell_f[sh] += wt * z ** kk * g_half(z, b)


@njit(cache=True)
def scan_norm(d, c, G, gu, gw, m, tmax, hyperbolic, spf, xmax, ymax,
              want_list, cap, nshell, t1, thresh, b):
    """Visit every v with Q(v) = m and -Q(v_x) <= tmax*m.

    Outer coordinates are enumerated over the majorant ellipsoid; the inner
    level(s) are solved exactly: a quadratic in v[0] in the general case, or
    a divisor split X*Y = N when (v[0], v[1]) span a hyperbolic plane.
    stats = [count, count(t<=t1), A_mt, A_er, n_mt, n_er, n_nongeneric, min q].
    """
    n = d.shape[0]
    kk = 1.0 + 0.5 * b
    bound = 2.0 * m * (1.0 + 2.0 * tmax)
    bound = bound * (1.0 + FLOAT_SLACK) + FLOAT_SLACK
    out = np.zeros((cap if want_list else 1, n), np.int64)
    qout = np.zeros(cap if want_list else 1)
    stats = np.zeros(8)
    stats[7] = np.inf
    shell_n = np.zeros(max(nshell, 1))
    shell_h = np.zeros(max(nshell, 1))
    shell_f = np.zeros(max(nshell, 1))
    buf = np.zeros(16384, np.int64)
    v = np.zeros(n, np.int64)
    upper = np.zeros(n, np.int64)
    center = np.zeros(n)
    partial = np.zeros(n + 1)
    L0 = 2 if hyperbolic else 1
    nmax_xy = xmax * ymax
    i = n - 1
    _init_level(i, v, upper, center, partial, d, c, bound)
    # v and -v give the same statistics: keep outer parts whose top nonzero entry is positive
    if v[i] < 0:
        v[i] = 0
    while True:
        if v[i] > upper[i]:
            i += 1
            if i == n:
                break
            v[i] += 1
            continue
        diff = v[i] - center[i]
        partial[i] = partial[i + 1] + d[i] * diff * diff
        if i > L0:
            i -= 1
            _init_level(i, v, upper, center, partial, d, c, bound)
            if v[i] < 0:
                top = True
                for j in range(i + 1, n):
                    if v[j] != 0:
                        top = False
                        break
                if top:
                    v[i] = 0
            continue
        # inner solve with v[L0:] fixed
        wt = 1.0
        for j in range(L0, n):
            if v[j] != 0:
                wt = 2.0
                break
        if not hyperbolic:
            beta = 0
            for j in range(1, n):
                beta += G[0, j] * v[j]
            v0 = v[0]
            v[0] = 0
            gamma = _quad(v, G)
            alpha = G[0, 0] // 2
            if alpha == 0:
                if beta != 0:
                    if (m - gamma) % beta == 0:
                        v[0] = (m - gamma) // beta
                        _emit(v, wt, gu, gw, m, tmax, thresh, b, kk, nshell, t1,
                              want_list, out, qout, stats, shell_n, shell_h, shell_f)
                elif gamma == m:
                    s = 0.0
                    for j in range(1, n):
                        s += c[0, j] * v[j]
                    rem = (bound - partial[1]) / d[0]
                    if rem >= 0.0:
                        r = math.sqrt(rem)
                        for x in range(math.ceil(-s - r), math.floor(-s + r) + 1):
                            v[0] = x
                            _emit(v, wt, gu, gw, m, tmax, thresh, b, kk, nshell, t1,
                                  want_list, out, qout, stats, shell_n, shell_h, shell_f)
            else:
                disc = beta * beta - 4 * alpha * (gamma - m)
                if disc >= 0:
                    sq = int(math.sqrt(float(disc)))
                    while sq * sq > disc:
                        sq -= 1
                    while (sq + 1) * (sq + 1) <= disc:
                        sq += 1
                    if sq * sq == disc:
                        for sgn in (1, -1):
                            if sgn == -1 and sq == 0:
                                break
                            num = -beta + sgn * sq
                            if num % (2 * alpha) == 0:
                                v[0] = num // (2 * alpha)
                                _emit(v, wt, gu, gw, m, tmax, thresh, b, kk, nshell, t1,
                                      want_list, out, qout, stats, shell_n, shell_h, shell_f)
            v[0] = v0
            v[1] += 1
            continue
        a0 = 0
        a1 = 0
        for j in range(2, n):
            a0 += G[0, j] * v[j]
            a1 += G[1, j] * v[j]
        v[0] = 0
        v[1] = 0
        qr = _quad(v, G)
        nn = m + a0 * a1 - qr
        if nn != 0:
            na = abs(nn)
            if na <= nmax_xy:
                cnt = _divisors(na, spf, buf)
                for t in range(cnt):
                    dv = buf[t]
                    if dv > xmax:
                        continue
                    for sgn in (1, -1):
                        X = sgn * dv
                        Y = nn // X
                        if abs(Y) > ymax:
                            continue
                        v[0] = X - a1
                        v[1] = Y - a0
                        _emit(v, wt, gu, gw, m, tmax, thresh, b, kk, nshell, t1,
                              want_list, out, qout, stats, shell_n, shell_h, shell_f)
        else:
            # X = 0 line, then Y = 0 line without the shared point
            s = 0.0
            for j in range(2, n):
                s += c[1, j] * v[j]
            rem = (bound - partial[2]) / d[1]
            if rem >= 0.0:
                r = math.sqrt(rem)
                v[0] = -a1
                for x1 in range(math.ceil(-s - r), math.floor(-s + r) + 1):
                    v[1] = x1
                    _emit(v, wt, gu, gw, m, tmax, thresh, b, kk, nshell, t1,
                          want_list, out, qout, stats, shell_n, shell_h, shell_f)
                v[1] = -a0
                c1 = -s
                rem0 = (bound - partial[2] - d[1] * (v[1] - c1) ** 2) / d[0]
                if rem0 >= 0.0:
                    s0 = c[0, 1] * v[1]
                    for j in range(2, n):
                        s0 += c[0, j] * v[j]
                    r0 = math.sqrt(rem0)
                    for x0 in range(math.ceil(-s0 - r0), math.floor(-s0 + r0) + 1):
                        if x0 == -a1:
                            continue
                        v[0] = x0
                        _emit(v, wt, gu, gw, m, tmax, thresh, b, kk, nshell, t1,
                              want_list, out, qout, stats, shell_n, shell_h, shell_f)
        v[0] = 0
        v[1] = 0
        v[2] += 1
        i = 2
    return out, qout, stats, shell_n, shell_h, shell_f


@njit(cache=True)
def fp_theta(d, c, G, bound, N):
    """hist[q] = #{v : Q(v) = q} for q <= N; Q(v) = v^T G v / 2 evaluated exactly."""
    n = d.shape[0]
    bound = bound * (1.0 + FLOAT_SLACK) + FLOAT_SLACK
    hist = np.zeros(N + 1, np.int64)
    v = np.zeros(n, np.int64)
    upper = np.zeros(n, np.int64)
    center = np.zeros(n)
    partial = np.zeros(n + 1)
    i = n - 1
    _init_level(i, v, upper, center, partial, d, c, bound)
    while True:
        if v[i] > upper[i]:
            i += 1
            if i == n:
                break
            v[i] += 1
            continue
        diff = v[i] - center[i]
        partial[i] = partial[i + 1] + d[i] * diff * diff
        if i == 0:
            q = _quad(v, G)
            if 0 <= q <= N:
                hist[q] += 1
            v[0] += 1
            continue
        i -= 1
        _init_level(i, v, upper, center, partial, d, c, bound)
    return hist
