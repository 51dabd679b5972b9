"""The acceptance suite: eleven desk-scale checks with fixed scenarios.

Each check returns a :class:`Verdict` carrying the measured quantities next to
the threshold it was held to.  Sweeps over the shared grid of weights, zero
sets and n are cached so that checks reusing the same solutions stay cheap.
"""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .asymptotics import (
    compact_grid,
    det_lower_bound_ratio,
    dn_correlation,
    g_nonvanishing_check,
    max_off_zeros,
    monic_h,
    plan_subsequence,
)
from .errors import SubsequenceRequired
from .kernels import tail_factor
from .opa import OpaSolution, opa_kernel_route, opa_normal_equations, route_gap, wiener_norm
from .target import TargetPolynomial
from .weights import WeightModel
from .zeros import EmpiricalMeasure, discrepancy, find_roots, pairing_distance, weyl_moments

ALPHAS = (-1.0, 0.0, 1.0)
ZERO_SETS: dict[str, tuple[complex, ...]] = {
    "{1}": (1,),
    "{1,-1}": (1, -1),
    "{1,2}": (1, 2),
    "{e^(2pi i/5),1.25e^(-i)}": (cmath.exp(2j * math.pi / 5), 1.25 * cmath.exp(-1j)),
}
SWEEP_END = 300
PLAN_EPS = 0.1
CORPUS_SEED = 20240601
CORPUS_SIZE = 50


@dataclass
class Verdict:
    number: int
    title: str
    passed: bool
    measured: dict = field(default_factory=dict)
    detail: str = ""
    seconds: float = 0.0

    @property
    def status(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def line(self) -> str:
        shown = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{self.status}] criterion {self.number:>2} {self.title}: {shown}"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "title": self.title, "status": self.status,
                "measured": self.measured, "detail": self.detail}


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def grid_cases():
    for alpha in ALPHAS:
        for name, zeros in ZERO_SETS.items():
            yield alpha, name, zeros


@lru_cache(maxsize=None)
def _target(zeros: tuple[complex, ...]) -> TargetPolynomial:
    return TargetPolynomial.from_zeros(zeros)


@lru_cache(maxsize=None)
def _solution(alpha: float, zeros: tuple[complex, ...], n: int) -> OpaSolution:
    return opa_kernel_route(WeightModel.dirichlet(alpha), _target(zeros), n)


def _planned(f: TargetPolynomial, lo: int, hi: int) -> list[int]:
    if f.d1 == 0:
        return list(range(lo, hi + 1))
    return plan_subsequence(f.boundary_angles(), PLAN_EPS, lo, hi, hi - lo + 1).indices


def check_1() -> Verdict:
    """f = z - 1, omega = 1: zeros are the (n+2)-th roots of unity other than 1."""
    worst_dist, worst_disc = 0.0, 0.0
    ok = True
    for n in (10, 50, 200):
        roots = find_roots(_solution(0.0, (1,), n).residual)
        k = np.arange(1, n + 2)
        expected = np.exp(2j * np.pi * k / (n + 2))
        dist = pairing_distance(roots.points, expected)
        disc = discrepancy(roots)
        worst_dist = max(worst_dist, dist)
        worst_disc = max(worst_disc, disc * (n + 2) / 4)
        ok &= dist <= 1e-8 and disc <= 4 / (n + 2)
    return Verdict(1, "root-of-unity reproduction", ok,
                   {"max_pair_dist": worst_dist, "max_disc_over_bound": worst_disc},
                   "pairing <= 1e-8, discrepancy <= 4/(n+2)")


def check_2() -> Verdict:
    """Kernel route and normal equations agree on every residual coefficient."""
    worst = 0.0
    for alpha, _, zeros in grid_cases():
        w = WeightModel.dirichlet(alpha)
        for n in (5, 20, 60, 100):
            gap = route_gap(_solution(alpha, zeros, n), opa_normal_equations(w, _target(zeros), n))
            worst = max(worst, gap)
    return Verdict(2, "route equivalence", worst <= 1e-8, {"max_rel_gap": worst}, "<= 1e-8")


def check_3() -> Verdict:
    """Wiener norm of 1 - p_n f stays bounded over the sweep."""
    worst_ratio = 0.0
    worst_unit = 0.0
    for alpha, name, zeros in grid_cases():
        norms = {n: wiener_norm(_solution(alpha, zeros, n)) for n in range(10, SWEEP_END + 1)}
        first = max(v for n, v in norms.items() if n <= 150)
        second = max(v for n, v in norms.items() if n >= 150)
        worst_ratio = max(worst_ratio, second / first)
        if name == "{1}":
            worst_unit = max(worst_unit, max(abs(v - 1) for v in norms.values()))
    ok = worst_ratio <= 1.1 and worst_unit <= 1e-10
    return Verdict(3, "Wiener boundedness", ok,
                   {"max_second_over_first": worst_ratio, "z-1_max_dev": worst_unit},
                   "ratio <= 1.1; |W - 1| <= 1e-10 for f = z - 1")


def check_4() -> Verdict:
    """d_{0,n} S_{n+d} stays in a factor-10 band; equals 1 when f = z - 1."""
    worst_band = 0.0
    worst_unit = 0.0
    for alpha, name, zeros in grid_cases():
        w = WeightModel.dirichlet(alpha)
        d = len(zeros)
        vals = np.array([_solution(alpha, zeros, n).d0 * w.partial_sum(n + d)
                         for n in range(10, SWEEP_END + 1)])
        worst_band = max(worst_band, float(vals.max() / vals.min()))
        if name == "{1}":
            worst_unit = max(worst_unit, float(np.max(np.abs(vals - 1))))
    ok = worst_band <= 10 and worst_unit <= 1e-10
    return Verdict(4, "d0 asymptotics", ok,
                   {"max_band": worst_band, "z-1_max_dev": worst_unit},
                   "max/min <= 10; |d0 S - 1| <= 1e-10 for f = z - 1")


def check_5() -> Verdict:
    """max |1 - p_300 f| on a compact grid away from the boundary zeros."""
    measured = {}
    ok = True
    for alpha, name, zeros in grid_cases():
        if alpha not in (0.0, 1.0):
            continue
        f = _target(zeros)
        value = max_off_zeros(_solution(alpha, zeros, SWEEP_END), compact_grid(f))
        measured[f"a={alpha:g} {name}"] = value
        ok &= value <= 0.05
    return Verdict(5, "uniform decay off Z(f)", ok, measured, "<= 0.05 at n = 300")


def check_6() -> Verdict:
    """Discrepancy and Weyl moments along a planned subsequence."""
    zeros = (cmath.exp(2j * math.pi / 3), cmath.exp(-2j * math.pi / 3))
    f = _target(zeros)
    ns = _planned(f, 50, SWEEP_END)
    first = find_roots(_solution(1.0, zeros, ns[0]).residual)
    last = find_roots(_solution(1.0, zeros, ns[-1]).residual)
    disc0, disc1 = discrepancy(first), discrepancy(last)
    weyl0, weyl1 = max(weyl_moments(first, 10)), max(weyl_moments(last, 10))
    ok = disc1 <= 0.15 and weyl1 <= 0.1 and disc1 < disc0 and weyl1 < weyl0
    # diagnostic only: the same moments with every zero projected onto the circle
    angular = max(weyl_moments(EmpiricalMeasure(last.points / np.abs(last.points)), 10))
    return Verdict(6, "equidistribution on subsequence", ok,
                   {"n_first": ns[0], "n_last": ns[-1], "disc_first": disc0, "disc_last": disc1,
                    "weyl_first": weyl0, "weyl_last": weyl1, "max_radius": float(last.radii.max()),
                    "angular_weyl_last": angular},
                   "disc_last <= 0.15, weyl_last <= 0.1, both decreasing")


def check_7() -> Verdict:
    """Stability of d_{n+d,n} omega S / G_n."""
    w = WeightModel.dirichlet(0.0)
    ns = range(50, 201)
    rows = dn_correlation(w, _target((1, 2)), ns, {n: _solution(0.0, (1, 2), n) for n in ns})
    ratios = np.sort([abs(r.ratio) for r in rows if not r.skipped])
    cut = int(round(0.1 * ratios.size))
    middle = ratios[cut: ratios.size - cut]
    med = float(np.median(ratios))
    spread = float(max(middle.max() / med, med / middle.min()))
    unit_rows = dn_correlation(w, _target((1,)), ns, {n: _solution(0.0, (1,), n) for n in ns})
    unit_dev = max(abs(r.ratio - 1) for r in unit_rows)
    ok = spread <= 2 and unit_dev <= 1e-9 and not any(r.skipped for r in unit_rows)
    return Verdict(7, "G_n correlation", ok,
                   {"median": med, "middle80_spread": spread, "skipped": len(rows) - ratios.size,
                    "z-1_max_dev": unit_dev},
                   "middle 80% within factor 2 of median; z-1 ratio 1 +- 1e-9")


def check_8() -> Verdict:
    """Subexponential growth of H for the monic renormalization."""
    worst = -math.inf
    skipped = 0
    for alpha, _, zeros in grid_cases():
        for n in _planned(_target(zeros), 50, SWEEP_END):
            try:
                worst = max(worst, monic_h(_solution(alpha, zeros, n)).log_h_over_n)
            except SubsequenceRequired:
                skipped += 1
    unit_dev = 0.0
    for n in range(10, SWEEP_END + 1):
        h = monic_h(_solution(0.0, (1,), n)).log_h_over_n
        unit_dev = max(unit_dev, abs(h - math.log(n + 2) / n))
    ok = worst <= 0.2 and unit_dev <= 1e-9 and skipped == 0
    return Verdict(8, "Erdos-Turan growth", ok,
                   {"max_logH_over_n": worst, "skipped": skipped, "z-1_max_dev": unit_dev},
                   "<= 0.2 on planned n in [50, 300]; z-1 equals log(n+2)/n +- 1e-9")


def check_9() -> Verdict:
    """Normalized det(E) stays bounded away from 0."""
    worst_ratio = math.inf
    worst_unit = 0.0
    positive = True
    for alpha, name, zeros in grid_cases():
        w = WeightModel.dirichlet(alpha)
        f = _target(zeros)
        vals = {n: det_lower_bound_ratio(w, f, n) for n in range(10, 201)}
        positive &= all(v > 0 for v in vals.values())
        low = min(v for n, v in vals.items() if n <= 100)
        high = min(v for n, v in vals.items() if n >= 100)
        worst_ratio = min(worst_ratio, high / low)
        if name == "{1}":
            worst_unit = max(worst_unit, max(abs(v - 1) for v in vals.values()))
    ok = positive and worst_ratio >= 0.5 and worst_unit <= 1e-12
    return Verdict(9, "det(E) lower bound", ok,
                   {"min_late_over_early": worst_ratio, "all_positive": positive,
                    "z-1_max_dev": worst_unit},
                   ">= 0.5; single zero identically 1")


def check_10() -> Verdict:
    """Tail factor C(N, 2) of the truncated kernel."""
    devs = {f"a={a:g}": tail_factor(WeightModel.dirichlet(a), 10_000, 2).deviation for a in (0, 1)}
    exact = tail_factor(WeightModel.dirichlet(0), 10, 2).value
    exact_err = abs(exact - 2047 / 2048)
    ok = max(devs.values()) <= 0.01 and exact_err <= 1e-15
    return Verdict(10, "kernel tail factor", ok, {**devs, "N=10_err": exact_err},
                   "|C - 1| <= 0.01 at N = 1e4; C(10, 2) = 2047/2048")


def g_corpus(seed: int = CORPUS_SEED, size: int = CORPUS_SIZE) -> list[TargetPolynomial]:
    """Zero sets {1} plus 1..4 exterior zeros with 1.1 <= |z| <= 5."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < size:
        k = int(rng.integers(1, 5))
        r = rng.uniform(1.1, 5.0, k)
        t = rng.uniform(-math.pi, math.pi, k)
        try:
            out.append(TargetPolynomial.from_zeros([1.0, *(r * np.exp(1j * t))]))
        except ValueError:
            continue
    return out


def check_11() -> Verdict:
    """G != 0 on a seeded corpus."""
    checks = [g_nonvanishing_check(f) for f in g_corpus()]
    smallest = min(abs(c.G) for c in checks)
    # scale-free factor of G: |G| = prod|a|^2 |det H| |1 - g(1)|
    factor = min(abs(1 - c.blaschke_value) for c in checks)
    below = sum(abs(c.G) <= 1e-9 for c in checks)
    return Verdict(11, "G nonvanishing corpus", smallest > 1e-9,
                   {"configs": len(checks), "min_abs_G": smallest, "below_1e-9": below,
                    "min_abs_1-g(1)": factor}, "> 1e-9")


CHECKS: dict[int, Callable[[], Verdict]] = {
    1: check_1, 2: check_2, 3: check_3, 4: check_4, 5: check_5, 6: check_6,
    7: check_7, 8: check_8, 9: check_9, 10: check_10, 11: check_11,
}


def run_check(number: int) -> Verdict:
    start = time.perf_counter()
    verdict = CHECKS[number]()
    verdict.seconds = time.perf_counter() - start
    return verdict


def run_suite(numbers=None) -> list[Verdict]:
    selected = sorted(CHECKS) if numbers is None else sorted(set(numbers))
    unknown = [k for k in selected if k not in CHECKS]
    if unknown:
        raise KeyError(f"unknown criteria {unknown}; choose from 1..{len(CHECKS)}")
    return [run_check(k) for k in selected]


def clear_cache() -> None:
    _solution.cache_clear()
