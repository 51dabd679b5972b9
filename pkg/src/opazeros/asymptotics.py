"""Quantities that control the asymptotics of ``1 - p_n f`` and of its zeros.

The Erdos-Turan functional ``H(P) = max_{|z|=1} |P(z)| / sqrt(|P(0)|)`` of the
monic renormalization, the bordered determinants ``G_n`` that govern the
leading residual coefficient, the normalized Gram determinant, the decay of
the coefficient vector ``A``, and a planner for indices ``n`` at which every
``n * theta_j`` is close to 0 modulo ``2 pi``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import ConsistencyError, DomainError, SubsequenceRequired
from .kernels import assemble_gram
from .opa import OpaSolution, opa_kernel_route
from .target import TargetPolynomial, horner
from .weights import WeightModel
from .zeros import TRIM_TOL

MIN_SAMPLES = 4096
G_DEGENERATE = 1e-12
G_SKIP = 1e-9
CHECK_DPS = 50
CHECK_TOL = 1e-10
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass
class HEstimate:
    """Sampled value of ``H``; ``value`` is a lower bound up to rounding."""

    value: float
    max_modulus: float
    p0: float
    samples: int
    upper_bound: float | None
    sampled: bool = True


def _max_on_circle(coeffs: np.ndarray, samples: int) -> float:
    """Max of |P| on the circle: FFT on ``samples`` points, then golden section."""
    c = np.asarray(coeffs, dtype=complex)
    deg = c.size - 1
    if samples <= deg:
        raise ValueError(f"need more than {deg} circle samples, got {samples}")
    padded = np.zeros(samples, dtype=complex)
    padded[: c.size] = c
    values = np.abs(np.fft.ifft(padded) * samples)
    j = int(np.argmax(values))
    best = float(values[j])
    h = 2 * math.pi / samples

    def mod_at(t: float) -> float:
        return float(abs(horner(c, cmath.exp(1j * t))))

    lo, hi = (j - 1) * h, (j + 1) * h
    a = hi - _GOLDEN * (hi - lo)
    b = lo + _GOLDEN * (hi - lo)
    fa, fb = mod_at(a), mod_at(b)
    for _ in range(60):
        if fa < fb:
            lo, a, fa = a, b, fb
            b = lo + _GOLDEN * (hi - lo)
            fb = mod_at(b)
        else:
            hi, b, fb = b, a, fa
            a = hi - _GOLDEN * (hi - lo)
            fa = mod_at(a)
    return max(best, fa, fb)


def h_functional(coeffs, circle_samples: int | None = None) -> HEstimate:
    """``H(P) = max_{|z|=1} |P(z)| / sqrt(|P(0)|)`` by dense sampling.

    With at least ``8 * deg`` samples, Bernstein's inequality ``|P'| <= deg max|P|``
    gives the bound ``max|P| <= sampled_max / (1 - pi * deg / samples)``,
    reported as ``upper_bound``.
    """
    c = np.asarray(coeffs, dtype=complex)
    p0 = float(abs(c[0])) if c.size else 0.0
    if not p0 > 1e-300:
        raise DomainError("H is undefined when P(0) = 0")
    deg = c.size - 1
    samples = circle_samples or max(8 * deg, MIN_SAMPLES)
    peak = _max_on_circle(c, samples)
    scale = math.sqrt(p0)
    upper = None
    if samples >= 8 * deg:
        upper = peak / (1 - math.pi * deg / samples) / scale
    return HEstimate(peak / scale, peak, p0, samples, upper)


@dataclass
class MonicH:
    n: int
    max_circle: float
    d0: float
    dlead: float
    H: float
    log_h_over_n: float
    upper_bound: float | None = None


def monic_h(sol: OpaSolution, circle_samples: int | None = None) -> MonicH:
    """``H`` of ``(1 - p_n f) / d_{n+d,n}``, i.e. ``max|P_n| / sqrt(d_0 |d_{n+d}|)``."""
    res = sol.residual
    lead = float(abs(res[-1]))
    if lead <= TRIM_TOL * float(np.max(np.abs(res))):
        raise SubsequenceRequired(
            f"leading coefficient d_(n+d,n) is negligible at n = {sol.n}; "
            "subsequence required at this n"
        )
    est = h_functional(res, circle_samples)
    d0 = sol.d0
    H = est.max_modulus / math.sqrt(d0 * lead)
    upper = None
    if est.upper_bound is not None:
        upper = est.upper_bound * math.sqrt(est.p0) / math.sqrt(d0 * lead)
    ratio = math.log(H) / sol.n if sol.n > 0 else math.nan
    return MonicH(sol.n, est.max_modulus, d0, lead, H, ratio, upper)


def _conj_power(z: complex, p: int) -> complex:
    """``conj(z)**p``; unimodular z goes through the angle for accuracy."""
    if abs(abs(z) - 1.0) <= 1e-15:
        return cmath.exp(-1j * p * cmath.phase(z))
    return z.conjugate() ** p


def bordered_matrix(f: TargetPolynomial, n: int) -> np.ndarray:
    """The matrix ``[[sum_j conj(z_j)^(n+d), v], [s^t, B]]`` whose determinant is G_n."""
    if f.d1 < 1:
        raise DomainError("G_n needs at least one zero on the unit circle")
    d, d1 = f.d, f.d1
    e = n + d
    bnd = f.boundary
    ext = f.exterior
    size = d - d1 + 1
    M = np.zeros((size, size), dtype=complex)
    M[0, 0] = sum(_conj_power(z, e) for z in bnd)
    for m, zm in enumerate(ext):
        M[0, m + 1] = 1 / zm.conjugate()
    for l, zl in enumerate(ext):
        M[l + 1, 0] = sum(_conj_power(zj, e + 1) / (zj.conjugate() * zl - 1) for zj in bnd)
        for m, zm in enumerate(ext):
            M[l + 1, m + 1] = 1 / (zm.conjugate() * zl - 1)
    return M


def g_determinant(f: TargetPolynomial, n: int) -> complex:
    """``G_n``; reduces to ``sum_j conj(z_j)^(n+d)`` when every zero is unimodular."""
    M = bordered_matrix(f, n)
    if M.shape == (1, 1):
        return complex(M[0, 0])
    return complex(np.linalg.det(M))


@dataclass
class GCheck:
    G: complex
    blaschke_value: complex
    reduced_det: complex
    gram_det: complex
    projection_value: complex
    degenerate: bool


def g_nonvanishing_check(f: TargetPolynomial) -> GCheck:
    """``G`` for ``z_1 = 1`` as the only boundary zero, with its cross-checks.

    With ``a_j = 1/conj(z_j)`` the determinant factors as
    ``G = prod|a_j|^2 * det[[1, 1...], [p^t, H]]`` where ``p_l = 1/(1 - conj(a_l))``
    and ``H_lm = 1/(1 - conj(a_l) a_m)``.  The Szego projection ``g`` of 1 onto
    the span of the kernels at the ``a_j`` has the closed form
    ``g(1) = 1 - prod(-conj(a_j)) (1 - a_j)/(1 - conj(a_j))``; it is checked
    against a direct solve, and the reduced determinant against
    ``det(H) * (1 - g(1))``.  Nearby exterior zeros make these Cauchy-type
    determinants cancel heavily, so all of it runs at 50 digits.
    """
    if f.d < 2:
        raise DomainError("need at least one zero outside the closed disk")
    if f.d1 != 1 or abs(f.zeros[0] - 1) > 1e-12:
        raise DomainError("z_1 = 1 must be the only boundary zero; rotate f first")
    k = f.d - 1
    with mpmath.workdps(CHECK_DPS):
        z = [mpmath.mpc(v) for v in f.exterior]
        zc = [mpmath.conj(v) for v in z]
        # bordered matrix at n = 0 with the single boundary zero 1
        M = mpmath.matrix(k + 1, k + 1)
        M[0, 0] = 1
        for m in range(k):
            M[0, m + 1] = 1 / zc[m]
            M[m + 1, 0] = 1 / (z[m] - 1)
            for l in range(k):
                M[l + 1, m + 1] = 1 / (zc[m] * z[l] - 1)
        G = mpmath.det(M)

        a = [1 / v for v in zc]
        ac = [mpmath.conj(v) for v in a]
        prod = mpmath.mpc(1)
        for aj, ajc in zip(a, ac):
            prod *= -ajc * (1 - aj) / (1 - ajc)
        blaschke = 1 - prod

        H = mpmath.matrix(k, k)
        R = mpmath.matrix(k + 1, k + 1)
        R[0, 0] = 1
        for l in range(k):
            R[0, l + 1] = 1
            R[l + 1, 0] = 1 / (1 - ac[l])
            for m in range(k):
                H[l, m] = R[l + 1, m + 1] = 1 / (1 - ac[l] * a[m])
        reduced = mpmath.det(R)
        det_h = mpmath.det(H)
        factor = mpmath.fprod(abs(v) ** 2 for v in a)
        if abs(G - factor * reduced) > CHECK_TOL * abs(G):
            raise ConsistencyError(f"G = {G} but prod|a|^2 * reduced det = {factor * reduced}")
        # projection coefficients: sum_j c_j / (1 - conj(a_j) a_l) = 1 for every l
        K = mpmath.matrix(k, k)
        for l in range(k):
            for j in range(k):
                K[l, j] = 1 / (1 - a[l] * ac[j])
        coef = mpmath.lu_solve(K, mpmath.matrix([1] * k))
        projection = mpmath.fsum(coef[j] / (1 - ac[j]) for j in range(k))
        if abs(projection - blaschke) > CHECK_TOL * max(1, abs(blaschke)):
            raise ConsistencyError(f"Szego projection {projection} != closed form {blaschke}")
        if abs(reduced - det_h * (1 - blaschke)) > CHECK_TOL * abs(reduced):
            raise ConsistencyError("reduced determinant != det(H) * (1 - g(1))")
        out = GCheck(complex(G), complex(blaschke), complex(reduced), complex(det_h),
                     complex(projection), abs(G) < G_DEGENERATE)
    return out


def det_lower_bound_ratio(w: WeightModel, f: TargetPolynomial, n: int) -> float:
    """``det E / (S^d1 omega^-(d-d1) prod|z_l|^(2(n+d+1)))`` at order ``n+d``.

    The normalizer's exterior factor is exactly the square of the Gram
    scaling, so the ratio is ``det(scaled E) * omega^(d-d1) / S^d1``, formed
    in the log domain.
    """
    gram = assemble_gram(w, f, n)
    order = gram.order
    log_norm = (
        f.d1 * math.log(w.partial_sum(order))
        - (f.d - f.d1) * math.log(w.weight_at(order))
        + 2 * (order + 1) * sum(math.log(abs(z)) for z in f.exterior)
    )
    return math.exp(gram.log_det() - log_norm)


@dataclass
class SubsequencePlan:
    angles: list[float]
    tolerance: float
    indices: list[int]
    requested: int
    n_min: int
    n_max: int
    advisory: str = ""

    def to_dict(self) -> dict:
        return {
            "angles": self.angles,
            "tolerance": self.tolerance,
            "indices": self.indices,
            "requested": self.requested,
            "found": len(self.indices),
            "n_min": self.n_min,
            "n_max": self.n_max,
            "advisory": self.advisory,
        }


def circle_distance(n: np.ndarray, theta: float) -> np.ndarray:
    """Distance from ``n * theta`` to 0 on the circle ``R / 2 pi Z``."""
    r = np.remainder(np.asarray(n, dtype=float) * theta, 2 * math.pi)
    return np.minimum(r, 2 * math.pi - r)


def plan_subsequence(angles, eps: float, n_min: int, n_max: int, count: int) -> SubsequencePlan:
    """Scan ``[n_min, n_max]`` for up to ``count`` indices with every
    ``|n theta_j mod 2 pi| <= eps``."""
    angles = [float(t) for t in angles]
    if not angles:
        raise ValueError("angles must be nonempty")
    if not 0 < eps < math.pi:
        raise ValueError(f"eps must lie in (0, pi), got {eps}")
    found: list[int] = []
    chunk = 65536
    start = max(n_min, 0)
    while start <= n_max and len(found) < count:
        ns = np.arange(start, min(n_max, start + chunk - 1) + 1)
        ok = np.ones(ns.size, dtype=bool)
        for t in angles:
            ok &= circle_distance(ns, t) <= eps
        found.extend(int(v) for v in ns[ok][: count - len(found)])
        start += chunk
    advisory = ""
    if not found:
        advisory = "no index found in range; enlarge n_max (existence is only asymptotic)"
    elif len(found) < count:
        advisory = f"only {len(found)} of {count} requested indices found in range"
    return SubsequencePlan(angles, eps, found, count, n_min, n_max, advisory)


@dataclass
class DnRow:
    n: int
    dlead: complex
    G: complex
    ratio: complex | None
    skipped: bool
    reason: str = ""


def dn_correlation(w: WeightModel, f: TargetPolynomial, n_list,
                   solutions: dict[int, OpaSolution] | None = None) -> list[DnRow]:
    """Rows ``(n, d_{n+d,n}, G_n, d_{n+d,n} omega_{n+d} S_{n+d} / G_n)``."""
    rows = []
    for n in sorted(n_list):
        sol = solutions[n] if solutions and n in solutions else opa_kernel_route(w, f, n)
        order = sol.order
        dlead = sol.leading
        G = g_determinant(f, n)
        if abs(dlead) <= TRIM_TOL * float(np.max(np.abs(sol.residual))):
            rows.append(DnRow(n, dlead, G, None, True, "leading coefficient trimmed"))
        elif abs(G) <= G_SKIP:
            rows.append(DnRow(n, dlead, G, None, True, "|G_n| below 1e-9"))
        else:
            ratio = dlead * w.weight_at(order) * w.partial_sum(order) / G
            rows.append(DnRow(n, dlead, G, complex(ratio), False))
    return rows


@dataclass
class ADecayRow:
    n: int
    i: int
    zero: complex
    value: float


def a_decay_table(w: WeightModel, f: TargetPolynomial, n_list,
                  solutions: dict[int, OpaSolution] | None = None) -> list[ADecayRow]:
    """``|A_{i,n}| S_{n+d} max(|z_i|, 1)^(n+d+1)`` for every zero and n."""
    rows = []
    for n in sorted(n_list):
        sol = solutions[n] if solutions and n in solutions else opa_kernel_route(w, f, n)
        S = w.partial_sum(sol.order)
        for i, z in enumerate(f.zeros):
            rows.append(ADecayRow(n, i + 1, z, float(abs(sol.A_scaled[i]) * S)))
    return rows


def compact_grid(f: TargetPolynomial, count: int = 200, radius: float = 0.2,
                 boundary_points: int = 64) -> np.ndarray:
    """``count`` points of the closed unit disk avoiding ``radius``-disks
    around the boundary zeros of f.

    Equispaced points on the circle plus a sunflower spiral inside, thinned
    deterministically to exactly ``count`` points.
    """
    def keep(pts: np.ndarray) -> np.ndarray:
        mask = np.ones(pts.size, dtype=bool)
        for z in f.boundary:
            mask &= np.abs(pts - z) >= radius
        return pts[mask]

    ring = keep(np.exp(2j * np.pi * np.arange(boundary_points) / boundary_points))
    need = count - ring.size
    golden_angle = math.pi * (3 - math.sqrt(5))
    m = max(need, 1)
    while True:
        k = np.arange(m)
        spiral = np.sqrt((k + 0.5) / m) * np.exp(1j * golden_angle * k)
        inner = keep(spiral)
        if inner.size >= need:
            break
        m += max(1, need - inner.size)
    return np.concatenate([ring, inner[:need]])


def max_off_zeros(sol: OpaSolution, grid: np.ndarray) -> float:
    return float(np.max(np.abs(horner(sol.residual, grid))))
