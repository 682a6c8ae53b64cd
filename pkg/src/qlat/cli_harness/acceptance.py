"""Acceptance battery. Each criterion returns (passed, detail, value)."""

from __future__ import annotations

import json
import math
import random
import statistics
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

from ..arith import primes_upto
from ..green_archimedean import (A_of_m, classify_bad, equidist_ratio, equidist_target, volume_omega,
                                 volume_omega_mc)
from ..lattice_core import IntegralLattice, PeriodPoint, fixture_L5, fixture_U3, quadratic_diagonal
from ..local_density import count_brute, count_identity_deviation, mu_p
from ..reduction_chains import (ChainModel, chain_basis, chain_index, chain_lattice, counts_below,
                                density_disc_bound, expected_index, is_sublattice, minima_profile,
                                random_base)
from .config import ExperimentConfig
from .ledger import run_ledger

# regression pins (exact where the computation is exact)
COUNT_IDENTITY_PIN = {"L5": Fraction(2, 5), "U3": Fraction(172, 455)}
ARCH_GROWTH_PIN = 151.36
LEDGER_ARCH_PIN = -75.0902
LEDGER_PIN_RTOL = 1e-3

SLOW = {5}


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str
    value: object
    seconds: float


def _fixtures():
    return {"L5": fixture_L5(), "U3": fixture_U3()}


def _density_sweep():
    for name, lat in _fixtures().items():
        for p in primes_upto(7):
            for m in range(1, 41):
                for n in (1, 2, 3):
                    yield name, lat, p, m, n


def crit_density_oracle(cfg):
    mismatches = []
    cases = 0
    for name, lat, p, m, n in _density_sweep():
        cases += 1
        val = mu_p(lat, p, m, n).value
        brute = Fraction(count_brute(lat, p, n, m), p ** (n * (lat.rank - 1)))
        if val != brute:
            mismatches.append((name, p, m, n))
    return not mismatches, f"{cases} cases, {len(mismatches)} mismatches {mismatches[:5]}", len(mismatches)


def crit_uniform_lower(cfg):
    # both fixtures are maximal (L5 has |L^v/L| = 2, U3 is unimodular)
    low = min(mu_p(lat, p, m, n).value for _, lat, p, m, n in _density_sweep())
    return low >= Fraction(1, 2), f"min mu = {low}", low


def _max_count_dev(lat, pmax):
    best = Fraction(0)
    for p in primes_upto(pmax):
        method = "explicit" if p > 2 else "recursion"
        for m in range(1, 41):
            best = max(best, p * count_identity_deviation(lat, p, m, method))
    return best


def crit_count_identity(cfg):
    ok = True
    parts = []
    for name, lat in _fixtures().items():
        small = _max_count_dev(lat, 7)
        large = _max_count_dev(lat, 50)
        ok &= large <= small and small == COUNT_IDENTITY_PIN[name]
        parts.append(f"{name}: p<=7 {small}, p<=50 {large}, pinned {COUNT_IDENTITY_PIN[name]}")
    return ok, "; ".join(parts), None


def crit_second_measure(cfg):
    lat = fixture_L5()
    worst = 0.0
    parts = []
    for T in (1, 3, 10):
        closed = volume_omega(lat, T)
        mc, se = volume_omega_mc(lat, T, samples=10**7, seed=cfg.seed)
        rel = abs(mc - closed) / closed
        worst = max(worst, rel)
        parts.append(f"T={T}: closed {closed:.6g} mc {mc:.6g}+-{se:.2g} rel {rel:.2e}")
    return worst <= 0.01, "; ".join(parts), worst


def _point(cfg):
    lat = IntegralLattice.load(cfg.lattice)
    return lat, PeriodPoint.load(lat, cfg.point)


def crit_equidistribution(cfg):
    lat, pt = _point(cfg)
    ms = [5000 + 263 * j for j in range(20)]
    ratios = [equidist_ratio(lat, pt, m, 1.0, 3.0) for m in ms]
    mean = statistics.fmean(ratios)
    target = (2 * math.sqrt(2) - 1) / 7
    rel = abs(mean - target) / target
    closed = equidist_target(lat, 1.0, 3.0)
    return rel <= 0.10, f"mean ratio {mean:.6f}, target {target:.6f} (closed form {closed:.6f}), rel {rel:.3e}", mean


def _windows():
    return ((64, 256), (256, 1024), (1024, 4096))


def crit_arch_growth(cfg):
    lat, pt = _point(cfg)
    b = lat.b
    med = []
    worst = 0.0
    rows = []
    for j in range(2, 61):
        m = cfg.D * j * j
        rep = A_of_m(lat, pt, m)
        norm = m ** (b / 2) * math.log(m)
        rows.append((m, rep.A_mt / norm))
        worst = max(worst, rep.A / norm)
    for lo, hi in _windows():
        vals = [v for m, v in rows if lo <= m < hi]
        med.append(statistics.median(vals) if vals else math.nan)
    decreasing = all(x > y for x, y in zip(med, med[1:]))
    ok = decreasing and worst <= ARCH_GROWTH_PIN
    return ok, f"window medians {[round(x, 4) for x in med]}, max A/(m^(b/2) log m) {worst:.4f} (pin {ARCH_GROWTH_PIN})", worst


def crit_bad_set(cfg):
    lat, pt = _point(cfg)
    logs = []
    sizes = []
    for X in (64, 128, 256):
        bad = classify_bad(lat, pt, X)
        sizes.append(len(bad))
        logs.append(math.log(len(bad)) / math.log(X) if bad else -math.inf)
    ok = all(x >= y for x, y in zip(logs, logs[1:]))
    return ok, f"|bad| {sizes}, log|bad|/log X {[round(x, 4) for x in logs]}", logs


def random_models(count: int = 100, seed: int = 0, depth_precision: int = 16):
    """Randomized chain models: ranks 3..5, p in {2,3,5,7}, e in {1,2,3}, lambda_rank <= 3."""
    rng = random.Random(seed)
    out = []
    for i in range(count):
        r = rng.choice((3, 4, 5))
        base = random_base(r, seed=rng.randrange(10**9))
        p = rng.choice((2, 3, 5, 7))
        e = rng.choice((1, 2, 3))
        s = rng.randint(0, min(3, r))
        out.append(ChainModel.random(base, p, s, e=e, n0=rng.choice((1, 2)),
                                     precision=depth_precision, seed=rng.randrange(10**9)))
    return out


def full_rank_models(seed: int = 0):
    """Rank-5 bases (b + 2 = 5), p = 3, e = 2, lambda_rank 0..3."""
    rng = random.Random(seed + 1)
    Z5 = quadratic_diagonal(1, 1, 1, 1, 1)
    bases = [Z5, Z5, random_base(5, seed=11), random_base(5, seed=12)]
    return [ChainModel.random(base, 3, s, e=2, n0=1, precision=16, seed=rng.randrange(10**9))
            for base, s in zip(bases, (0, 3, 2, 3))]


def low_rank_models(seed: int = 0):
    rng = random.Random(seed + 2)
    Z4 = quadratic_diagonal(1, 1, 1, 1)
    specs = [(Z4, 3, 0), (Z4, 3, 2), (random_base(4, seed=21), 5, 3), (random_base(4, seed=22), 3, 1),
             (quadratic_diagonal(1, 1, 2), 5, 2), (random_base(3, seed=23), 3, 1)]
    return [ChainModel.random(base, p, s, precision=40, seed=rng.randrange(10**9)) for base, p, s in specs]


def _slope(x, y) -> float:
    mx, my = statistics.fmean(x), statistics.fmean(y)
    return sum((a - mx) * (b - my) for a, b in zip(x, y)) / sum((a - mx) ** 2 for a in x)


def crit_chain_model(cfg):
    # (a) nesting and index law
    bad_a = 0
    for model in random_models(100, cfg.seed):
        prev = None
        for n in range(model.n0, model.n0 + 9):
            basis = chain_basis(model, n)
            if chain_index(model, n) != expected_index(model, n):
                bad_a += 1
            if prev is not None and not is_sublattice(basis, prev):
                bad_a += 1
            prev = basis
    # (b) minima scalings: constants fitted over n <= 20, growth exponents by least squares
    bad_b = []
    slopes = []
    for idx, model in enumerate(full_rank_models(cfg.seed)):
        ns = list(range(1, 21))
        prof = [minima_profile(model, n) for n in ns]
        x = [n / model.e * math.log(model.p) for n in ns]
        c_up = max(max(pr.mu) / math.exp(t) for pr, t in zip(prof, x))
        c_lo = min(pr.a[-1] / math.exp(2 * t) for pr, t in zip(prof, x))
        up = _slope(x, [math.log(max(pr.mu)) for pr in prof])
        lo = _slope(x, [math.log(pr.a[-1]) / 2 for pr in prof])
        slopes.append((round(c_up, 4), round(c_lo, 4), round(up, 4), round(lo, 4)))
        if not (math.isfinite(c_up) and c_lo > 0 and up <= 1.05 and lo >= 0.95):
            bad_b.append(idx)
    # (c) counts below X for rank <= b + 1
    ratios = []
    bad_c = []
    for idx, model in enumerate(low_rank_models(cfg.seed)):
        row = [counts_below(model, X) / X**2 for X in (64, 128, 256)]
        ratios.append([round(x, 4) for x in row])
        if any(y > 1.1 * x for x, y in zip(row, row[1:])):
            bad_c.append(idx)
    ok = bad_a == 0 and not bad_b and not bad_c
    detail = (f"(a) {bad_a} violations on 100 models; (b) (c, c', mu exponent, a exponent) {slopes}, "
              f"violations {bad_b}; "
              f"(c) ratios {ratios}, growing {bad_c}")
    return ok, detail, None


def crit_density_disc(cfg):
    models = full_rank_models(cfg.seed)
    ms = (1, 2, 3)
    fitted = 0.0
    for model in models:
        for m in ms:
            lhs, rhs = density_disc_bound(chain_lattice(model, model.n0), model.p, m)
            fitted = max(fitted, lhs / rhs)
    worst = 0.0
    for model in models:
        for n in range(model.n0, 21):
            for m in ms:
                lhs, rhs = density_disc_bound(chain_lattice(model, n), model.p, m)
                worst = max(worst, lhs / rhs)
    # T-forms: Q_T on L_{eT}; constant fitted at T = 1, checked for T <= 6
    t_bad = []
    t_ratio = []
    for idx, model in enumerate(models):
        for m in ms:
            vals = []
            for T in range(1, 7):
                lhs, _ = density_disc_bound(chain_lattice(model, model.e * T), model.p, m)
                vals.append(lhs * model.p ** (3 * T / 5))
            if vals[0] > 0 and any(v > vals[0] * (1 + 1e-9) for v in vals[1:]):
                t_bad.append((idx, m))
            t_ratio.append(max(vals))
    ok = worst <= fitted * (1 + 1e-9) and not t_bad
    detail = (f"lhs/rhs fitted on base levels {fitted:.4g}, max over levels n<=20 {worst:.4g}; "
              f"T-form violations {t_bad}")
    return ok, detail, worst


def crit_ledger(cfg):
    res = run_ledger(cfg)
    fin = [w.finite_normalized for w in res.windows]
    arch = [w.archimedean_normalized for w in res.windows]
    fin_ok = all(x > y for x, y in zip(fin, fin[1:]))
    steps = [abs(y - x) for x, y in zip(arch, arch[1:])]
    arch_ok = all(x < 0 for x in arch) and all(s2 <= s1 for s1, s2 in zip(steps, steps[1:]))
    pin_ok = abs(arch[-1] - LEDGER_ARCH_PIN) <= LEDGER_PIN_RTOL * abs(LEDGER_ARCH_PIN)
    detail = (f"finite/X^((b+1)/2)logX {[round(x, 4) for x in fin]} (decreasing: {fin_ok}); "
              f"archimedean {[round(x, 4) for x in arch]} (negative and settling: {arch_ok}, pin {LEDGER_ARCH_PIN}: {pin_ok})")
    return fin_ok and arch_ok and pin_ok, detail, {"finite": fin, "archimedean": arch}


CRITERIA = {
    1: ("density oracle equivalence", crit_density_oracle),
    2: ("uniform lower bound on local densities", crit_uniform_lower),
    3: ("count identity stability", crit_count_identity),
    4: ("closed-form volume vs Monte Carlo", crit_second_measure),
    5: ("equidistribution ratio", crit_equidistribution),
    6: ("archimedean growth", crit_arch_growth),
    7: ("bad-set sparsity", crit_bad_set),
    8: ("chain model laws", crit_chain_model),
    9: ("density-discriminant bound", crit_density_disc),
    10: ("height ledger shape", crit_ledger),
}


def run_criterion(number: int, cfg: ExperimentConfig | None = None) -> CriterionResult:
    cfg = (cfg or ExperimentConfig()).validate()
    title, fn = CRITERIA[number]
    t0 = time.perf_counter()
    passed, detail, value = fn(cfg)
    return CriterionResult(number, title, bool(passed), detail, value, time.perf_counter() - t0)


def format_line(res: CriterionResult) -> str:
    return f"criterion {res.number:2d} [{'PASS' if res.passed else 'FAIL'}] {res.title}: {res.detail} ({res.seconds:.1f}s)"


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def run_suite(cfg: ExperimentConfig | None = None, numbers=None, include_slow: bool = True,
              report_path=None, echo=print) -> int:
    numbers = sorted(numbers or CRITERIA)
    results = []
    for k in numbers:
        if k in SLOW and not include_slow:
            continue
        res = run_criterion(k, cfg)
        results.append(res)
        if echo:
            echo(format_line(res))
    if report_path:
        with open(report_path, "w") as fh:
            json.dump([_jsonable(asdict(r)) for r in results], fh, indent=2)
    return 0 if all(r.passed for r in results) else 1
