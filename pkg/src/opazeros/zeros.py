"""Zeros of polynomials and how evenly they spread around the unit circle.

Roots come from the Aberth-Ehrlich simultaneous iteration started on the
circles of the Newton polygon, then Newton-polished.  The empirical zero
measure is compared with the uniform measure on the circle through the arc
discrepancy of the arguments, Weyl moments, and a radial report.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import DomainError, RootFindingError

TRIM_TOL = 1e-14
ROOT_TOL = 1e-10
MAX_ITER = 200
DEFAULT_MOMENTS = 10
_EPS = np.finfo(float).eps
TWO_PI = 2 * math.pi


@dataclass
class EmpiricalMeasure:
    """Zeros of a polynomial, each carrying mass ``1/N``."""

    points: np.ndarray
    trimmed: int = 0
    backward_errors: np.ndarray = field(default_factory=lambda: np.empty(0))
    iterations: int = 0

    @property
    def N(self) -> int:
        return int(self.points.size)

    @property
    def angles(self) -> np.ndarray:
        """Sorted arguments in [0, 2*pi)."""
        a = np.mod(np.angle(self.points), TWO_PI)
        a[a >= TWO_PI] = 0.0
        return np.sort(a)

    @property
    def radii(self) -> np.ndarray:
        return np.abs(self.points)


@dataclass
class EquidistributionReport:
    discrepancy: float
    weyl: list[float]
    radial_max: float
    shell_fraction: float
    shell_eps: float

    @property
    def weyl_max(self) -> float:
        return max(self.weyl) if self.weyl else 0.0

    def to_dict(self) -> dict:
        return {
            "discrepancy": self.discrepancy,
            "weyl": list(self.weyl),
            "radial_max": self.radial_max,
            "shell_fraction": self.shell_fraction,
            "shell_eps": self.shell_eps,
        }


def trim_leading(coeffs, tol: float = TRIM_TOL) -> tuple[np.ndarray, int]:
    """Drop top coefficients below ``tol * max|c|``; returns (coeffs, count)."""
    c = np.asarray(coeffs, dtype=complex)
    if c.size == 0:
        return c, 0
    cutoff = tol * np.max(np.abs(c))
    top = c.size
    while top > 0 and abs(c[top - 1]) <= cutoff:
        top -= 1
    return c[:top], c.size - top


def _newton_polygon_guesses(c: np.ndarray) -> np.ndarray:
    """Initial approximations on the circles of the Newton polygon (Bini)."""
    n = c.size - 1
    mags = np.abs(c)
    idx = [k for k in range(n + 1) if mags[k] > 0]
    logs = {k: math.log(mags[k]) for k in idx}
    hull: list[int] = []
    for k in idx:
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # keep j only if it lies strictly above the chord i -> k
            if (logs[j] - logs[i]) * (k - i) <= (logs[k] - logs[i]) * (j - i):
                hull.pop()
            else:
                break
        hull.append(k)
    guesses = []
    sigma = 0.7
    for i, j in zip(hull[:-1], hull[1:]):
        m = j - i
        radius = math.exp((logs[i] - logs[j]) / m)
        for s in range(m):
            ang = TWO_PI * s / m + TWO_PI * i / n + sigma
            guesses.append(radius * complex(math.cos(ang), math.sin(ang)))
    return np.array(guesses, dtype=complex)


def _eval_with_ratio(c: np.ndarray, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Newton ratios ``p/p'`` and relative backward errors at each point.

    Points outside the unit circle are evaluated through the reversed
    polynomial in ``1/z`` so that nothing overflows.
    """
    n = c.size - 1
    absc = np.abs(c)
    ratio = np.empty(z.size, dtype=complex)
    berr = np.empty(z.size)
    inside = np.abs(z) <= 1
    if np.any(inside):
        x = z[inside]
        p = np.zeros_like(x)
        dp = np.zeros_like(x)
        a = np.zeros(x.size)
        ax = np.abs(x)
        for coef, mag in zip(c[::-1], absc[::-1]):
            dp = dp * x + p
            p = p * x + coef
            a = a * ax + mag
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio[inside] = p / dp
        berr[inside] = np.abs(p) / a
    if not np.all(inside):
        y = 1.0 / z[~inside]
        r = np.zeros_like(y)
        dr = np.zeros_like(y)
        a = np.zeros(y.size)
        ay = np.abs(y)
        # r(y) = sum_k c_k y^(n-k): Horner over c in ascending order
        for coef, mag in zip(c, absc):
            dr = dr * y + r
            r = r * y + coef
            a = a * ay + mag
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            ratio[~inside] = z[~inside] / (n - y * dr / r)
        berr[~inside] = np.abs(r) / a
    return ratio, berr


def _aberth(c: np.ndarray, max_iter: int) -> tuple[np.ndarray, np.ndarray, int]:
    n = c.size - 1
    if n == 1:
        root = np.array([-c[0] / c[1]])
        _, berr = _eval_with_ratio(c, root)
        return root, berr, 0
    z = _newton_polygon_guesses(c)
    active = np.ones(n, dtype=bool)
    stop = 4.0 * (n + 1) * _EPS
    berr = np.full(n, np.inf)
    it = 0
    for it in range(1, max_iter + 1):
        ids = np.nonzero(active)[0]
        ratio, be = _eval_with_ratio(c, z[ids])
        berr[ids] = be
        done = (be <= stop) | (ratio == 0)
        diff = z[ids, None] - z[None, :]
        diff[np.arange(ids.size), ids] = 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = 1.0 / diff
        inv[np.arange(ids.size), ids] = 0.0
        s = inv.sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = ratio / (1.0 - ratio * s)
        step[done | ~np.isfinite(step)] = 0.0
        z[ids] = z[ids] - step
        small = np.abs(step) <= _EPS * np.abs(z[ids])
        active[ids[done | small]] = False
        if not np.any(active):
            break
    _, berr = _eval_with_ratio(c, z)
    return z, berr, it


def _polish(c: np.ndarray, z: np.ndarray, berr: np.ndarray, steps: int = 2):
    for _ in range(steps):
        ratio, _ = _eval_with_ratio(c, z)
        cand = z - np.where(np.isfinite(ratio), ratio, 0)
        _, cand_err = _eval_with_ratio(c, cand)
        better = cand_err < berr
        z = np.where(better, cand, z)
        berr = np.where(better, cand_err, berr)
    return z, berr


def find_roots(coeffs, max_iter: int = MAX_ITER, tol: float = ROOT_TOL) -> EmpiricalMeasure:
    """All zeros of the ascending-order polynomial ``coeffs``.

    Leading coefficients below ``1e-14 * max|c|`` are trimmed and counted.
    Every returned root has relative backward error ``|P(z)| / sum|c_k||z|^k``
    at most ``tol``; otherwise RootFindingError is raised.
    """
    c, trimmed = trim_leading(coeffs)
    if c.size <= 1:
        raise DomainError("polynomial has degree 0 after trimming; it has no zeros")
    low = 0
    while c[low] == 0:
        low += 1
    core = c[low:] / c[-1]
    if core.size > 1:
        z, berr, iters = _aberth(core, max_iter)
        z, berr = _polish(core, z, berr)
    else:
        z, berr, iters = np.empty(0, dtype=complex), np.empty(0), 0
    worst = float(np.max(berr)) if berr.size else 0.0
    if not worst <= tol:
        raise RootFindingError(f"Aberth iteration did not converge in {max_iter} steps", worst)
    points = np.concatenate([np.zeros(low, dtype=complex), z])
    errors = np.concatenate([np.zeros(low), berr])
    return EmpiricalMeasure(points, trimmed, errors, iters)


def companion_roots(coeffs) -> np.ndarray:
    """Eigenvalues of the companion matrix; an independent check on find_roots."""
    c, _ = trim_leading(coeffs)
    return np.polynomial.polynomial.polyroots(c)


def pairing_distance(a, b) -> float:
    """Largest distance under the optimal one-to-one pairing of two root sets."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.size != b.size:
        raise ValueError(f"root sets differ in size: {a.size} vs {b.size}")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(np.max(cost[rows, cols]))


def discrepancy(m: EmpiricalMeasure) -> float:
    """Largest deviation of arc mass from normalized arc length, over all arcs.

    With ``D(x) = F(x) - x`` for the empirical distribution F of the angles
    scaled to [0, 1), every arc deviation is a difference ``D(b) - D(a)`` of
    one-sided values, so the supremum is ``sup D - inf D`` (Kuiper's
    statistic) and is found exactly in one pass over the sorted angles.
    """
    N = m.N
    if N < 1:
        raise DomainError("discrepancy needs at least one point")
    x = m.angles / TWO_PI
    i = np.arange(N)
    upper = max(0.0, float(np.max((i + 1) / N - x)))
    lower = min(0.0, float(np.min(i / N - x)))
    return min(1.0, upper - lower)


def weyl_moments(m: EmpiricalMeasure, M: int = DEFAULT_MOMENTS) -> list[float]:
    """``|(1/N) sum_j z_j^k|`` for k = 1..M, summed with fsum."""
    if M < 1:
        raise ValueError(f"M must be >= 1, got {M}")
    N = m.N
    pts = m.points
    out = []
    for k in range(1, M + 1):
        powers = pts ** k
        s = complex(math.fsum(powers.real.tolist()), math.fsum(powers.imag.tolist()))
        out.append(abs(s) / N)
    return out


def radial_report(m: EmpiricalMeasure, eps: float) -> tuple[float, float]:
    """(max_j ||z_j| - 1|, fraction of zeros with ||z_j| - 1| < eps)."""
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    dev = np.abs(m.radii - 1.0)
    return float(np.max(dev)), float(np.mean(dev < eps))


def equidistribution(m: EmpiricalMeasure, M: int = DEFAULT_MOMENTS,
                     shell_eps: float = 0.05) -> EquidistributionReport:
    radial, shell = radial_report(m, shell_eps)
    return EquidistributionReport(discrepancy(m), weyl_moments(m, M), radial, shell, shell_eps)
