"""Per-n experiment pipeline: approximant, zeros, asymptotic diagnostics.

``compute_record`` is a module-level function of picklable arguments so that
sweeps can fan out over a process pool.  Records are plain dicts ready for
JSON, and ``sweep`` always returns them sorted by n.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .asymptotics import (
    a_decay_table,
    det_lower_bound_ratio,
    dn_correlation,
    monic_h,
)
from .errors import IllConditionedError, NumericalError, SubsequenceRequired
from .kernels import PrecisionAdvisory, assemble_gram
from .opa import opa_kernel_route, opa_normal_equations, residual_norm_sq, route_gap, wiener_norm
from .precision import working_precision
from .target import TargetPolynomial
from .weights import WeightModel
from .zeros import equidistribution, find_roots

STAGES = ("approximant", "zeros", "asymptotics")
FAILURE_LIMIT = 0.5


def _num(x) -> float | None:
    """JSON-safe float: NaN and infinities become None."""
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _cplx(z) -> list[float | None] | None:
    if z is None:
        return None
    z = complex(z)
    return [_num(z.real), _num(z.imag)]


def compute_record(w: WeightModel, f: TargetPolynomial, n: int, bits: int = 53,
                   stages: tuple[str, ...] = STAGES, gram: bool = False) -> dict:
    """All requested per-n quantities, or ``{"n", "error"}`` on numerical failure."""
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", PrecisionAdvisory)
        try:
            with working_precision(bits):
                rec = _compute(w, f, n, stages, gram)
        except (NumericalError, OverflowError) as exc:
            rec = {"n": n, "error": f"{type(exc).__name__}: {exc}"}
    advisories = sorted({str(c.message) for c in caught
                         if issubclass(c.category, PrecisionAdvisory)})
    if advisories:
        rec["advisories"] = advisories
    return rec


def _compute(w, f, n, stages, gram) -> dict:
    sol = opa_kernel_route(w, f, n)
    rec: dict = {"n": n, "order": sol.order}
    if "approximant" in stages:
        try:
            gap = route_gap(sol, opa_normal_equations(w, f, n))
        except IllConditionedError:
            gap = None
        rec["d0"] = residual_norm_sq(sol)
        rec["wiener"] = wiener_norm(sol)
        rec["abs_A"] = [_num(v) for v in np.abs(sol.A)]
        rec["route_gap"] = _num(gap)
        rec["division_remainder"] = sol.division_remainder
        rec["residual"] = [_cplx(c) for c in sol.residual]
        if gram:
            rec["gram"] = assemble_gram(w, f, n).to_dict()
    if "zeros" in stages:
        measure = find_roots(sol.residual)
        report = equidistribution(measure)
        rec["zeros"] = [_cplx(z) for z in measure.points]
        rec["trimmed"] = measure.trimmed
        rec["equidistribution"] = report.to_dict()
        rec["weyl_max"] = report.weyl_max
    if "asymptotics" in stages:
        try:
            h = monic_h(sol)
            rec["H"] = {"maxcircle": h.max_circle, "d0": h.d0, "dlead": h.dlead, "H": h.H,
                        "logH_over_n": _num(h.log_h_over_n), "upper_bound": _num(h.upper_bound)}
        except SubsequenceRequired as exc:
            rec["H"] = {"skipped": str(exc)}
        if f.d1 >= 1:
            row = dn_correlation(w, f, [n], {n: sol})[0]
            rec["G"] = {"G_n": _cplx(row.G), "dlead": _cplx(row.dlead),
                        "ratio": _cplx(row.ratio), "skipped": row.reason}
        rec["det_ratio"] = _num(det_lower_bound_ratio(w, f, n))
        rec["a_decay"] = [_num(r.value) for r in a_decay_table(w, f, [n], {n: sol})]
    return rec


@dataclass
class SweepResult:
    records: list[dict]
    failures: list[int] = field(default_factory=list)
    aborted: bool = False


def sweep(w: WeightModel, f: TargetPolynomial, ns: Iterable[int], bits: int = 53,
          stages: tuple[str, ...] = STAGES, jobs: int = 1, gram: bool = False) -> SweepResult:
    """Compute records for every n; stop once more than half of all n failed."""
    ns = sorted(set(ns))
    limit = FAILURE_LIMIT * len(ns)
    records: list[dict] = []
    failures: list[int] = []
    aborted = False
    args = [(w, f, n, bits, stages, gram) for n in ns]
    if jobs > 1 and len(ns) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(compute_record, *a) for a in args]
            for fut in futures:
                rec = fut.result()
                records.append(rec)
                if "error" in rec:
                    failures.append(rec["n"])
                    if len(failures) > limit:
                        aborted = True
                        for other in futures:
                            other.cancel()
                        break
    else:
        for a in args:
            rec = compute_record(*a)
            records.append(rec)
            if "error" in rec:
                failures.append(rec["n"])
                if len(failures) > limit:
                    aborted = True
                    break
    records.sort(key=lambda r: r["n"])
    return SweepResult(records, failures, aborted)
