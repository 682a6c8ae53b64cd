"""Height ledger: archimedean and finite contributions per m and per dyadic window."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from ..eisenstein_series import a_of_m
from ..errors import QlatError
from ..green_archimedean import archimedean_report
from ..lattice_core import IntegralLattice, PeriodPoint
from ..reduction_chains import ChainModel, local_intersections, square_class_set
from .config import ExperimentConfig

ROW_HEADER = ["kind", "key", "archimedean", "finite", "height_estimate", "residual",
              "archimedean_normalized", "finite_normalized", "flag"]


@dataclass(frozen=True)
class HeightLedgerRow:
    m: int
    archimedean_sum: float
    finite_sum: float
    height_estimate: float
    residual: float
    flag: str = ""


@dataclass(frozen=True)
class WindowAggregate:
    X: int
    size: int
    archimedean: float
    finite: float
    archimedean_normalized: float
    finite_normalized: float


@dataclass(frozen=True)
class LedgerResult:
    rows: tuple[HeightLedgerRow, ...]
    windows: tuple[WindowAggregate, ...]

    def csv_rows(self):
        for r in self.rows:
            yield ["m", r.m, r.archimedean_sum, r.finite_sum, r.height_estimate, r.residual,
                   None, None, r.flag]
        for w in self.windows:
            yield ["window", w.X, w.archimedean, w.finite, None, None,
                   w.archimedean_normalized, w.finite_normalized, ""]


def ledger_values(cfg: ExperimentConfig) -> list[int]:
    ms = set()
    for X in cfg.X:
        ms.update(square_class_set(cfg.D, X))
    if cfg.jmax >= max(cfg.jmin, 1):
        ms.update(cfg.D * j * j for j in range(max(cfg.jmin, 1), cfg.jmax + 1))
    return sorted(ms)


def _arch_task(args):
    lattice_text, point_rows, D, m, kappa, shellmax, P = args
    lat = IntegralLattice.from_text(lattice_text)
    pt = PeriodPoint.from_vectors(lat, *point_rows)
    try:
        return archimedean_report(lat, pt, D, m, kappa, shellmax, P).Phi, ""
    except QlatError as exc:
        return math.nan, f"archimedean: {exc}"


def pmap(fn, items, threads: int):
    """Ordered map; worker count never changes the result order."""
    if threads <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(threads) as ex:
        return list(ex.map(fn, items))


def run_ledger(cfg: ExperimentConfig) -> LedgerResult:
    cfg.validate()
    lat = IntegralLattice.load(cfg.lattice)
    pt = PeriodPoint.load(lat, cfg.point)
    models = [ChainModel.load(p, cfg.height) for p in cfg.chains]
    ms = ledger_values(cfg)
    P = cfg.P_trunc or None
    tasks = [(lat.to_text(), (tuple(pt.u), tuple(pt.w)), cfg.D, m, cfg.kappa, cfg.shellmax, P)
             for m in ms]
    arch = pmap(_arch_task, tasks, cfg.threads)
    finite = dict.fromkeys(ms, 0.0)
    finite_flag = ""
    for model in models:
        try:
            li = local_intersections(model, ms)
        except QlatError as exc:
            finite_flag = f"finite: {exc}"
            finite = dict.fromkeys(ms, math.nan)
            break
        for m in ms:
            finite[m] += math.log(model.p) * float(li[m])
    rows = []
    for m, (phi, flag) in zip(ms, arch):
        c = a_of_m(lat, m, P).c_value
        est = -c / 2 * cfg.h_omega + cfg.cusp_bound_constant * m ** ((2 + lat.b) / 4)
        a_sum = phi / cfg.point_aut
        rows.append(HeightLedgerRow(m, a_sum, finite[m], est, a_sum + finite[m] - est,
                                    "; ".join(f for f in (flag, finite_flag) if f)))
    by_m = {r.m: r for r in rows}
    windows = []
    for X in cfg.X:
        S = square_class_set(cfg.D, X)
        if not S:
            continue
        norm = X ** ((lat.b + 1) / 2) * math.log(X)  # zero at X = 1
        a_tot = sum(by_m[m].archimedean_sum for m in S)
        f_tot = sum(by_m[m].finite_sum for m in S)
        a_n, f_n = (a_tot / norm, f_tot / norm) if norm else (math.nan, math.nan)
        windows.append(WindowAggregate(X, len(S), a_tot, f_tot, a_n, f_n))
    return LedgerResult(tuple(rows), tuple(windows))
