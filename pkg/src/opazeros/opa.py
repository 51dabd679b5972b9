"""Optimal polynomial approximants to 1/f and the residual ``1 - p_n f``.

Two independent routes compute the same object:

* ``opa_kernel_route`` uses the closed form of the residual coefficients,
  ``d_{k,n} = (1/omega_k) sum_i A_{i,n} conj(z_i)**k`` with ``E A = (1,...,1)``,
  and recovers ``p_n`` by dividing ``1 - residual`` by ``f``.
* ``opa_normal_equations`` solves the banded normal equations of the
  projection of 1 onto ``P_n f`` directly.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy.linalg import solveh_banded

from .errors import ConsistencyError, IllConditionedError
from .kernels import _scaled_terms, assemble_gram, csum, solve_gram, solve_gram_mp, zeros_mp
from .precision import get_bits, mp_context
from .target import TargetPolynomial, divide_low_order, horner, multiply
from .weights import WeightModel

__all__ = [
    "Route",
    "OpaSolution",
    "TargetPolynomial",
    "opa_kernel_route",
    "opa_normal_equations",
    "residual_norm_sq",
    "wiener_norm",
    "evaluate_residual",
    "route_gap",
    "weighted_inner",
]

DIVISION_TOL = 1e-8
NORM_TOL = 1e-8


class Route(str, enum.Enum):
    KERNEL = "kernel-closed-form"
    NORMAL = "normal-equations"


@dataclass
class OpaSolution:
    n: int
    f: TargetPolynomial
    weight: WeightModel
    p: np.ndarray
    residual: np.ndarray
    route: Route
    A_scaled: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=complex))
    log_sigma: np.ndarray = field(default_factory=lambda: np.empty(0))
    division_remainder: float = 0.0
    bits: int = 53

    @property
    def A(self) -> np.ndarray:
        """``A_{i,n}``; entries for far exterior zeros may underflow to 0."""
        with np.errstate(under="ignore"):
            return self.A_scaled * np.exp(-self.log_sigma)

    @property
    def order(self) -> int:
        return self.n + self.f.d

    @property
    def d0(self) -> float:
        return float(self.residual[0].real)

    @property
    def leading(self) -> complex:
        """``d_{n+d,n}``, the top residual coefficient."""
        return complex(self.residual[self.order])


def weighted_inner(w: WeightModel, a: np.ndarray, b: np.ndarray) -> complex:
    """``<a, b>_omega = sum_k a_k conj(b_k) omega_k`` for coefficient arrays."""
    size = max(len(a), len(b))
    aa = np.zeros(size, dtype=complex)
    bb = np.zeros(size, dtype=complex)
    aa[: len(a)] = a
    bb[: len(b)] = b
    return csum(aa * bb.conj() * w.weights(size - 1))


def _check_division(rem: np.ndarray, residual: np.ndarray) -> float:
    scale = float(np.max(np.abs(residual)))
    gap = float(np.max(np.abs(rem))) / scale
    if not gap <= DIVISION_TOL:
        raise ConsistencyError(
            f"division of 1 - residual by f left a remainder {gap:.3e} (relative) "
            f"above {DIVISION_TOL:g}; the Gram solve is inaccurate"
        )
    return gap


def opa_kernel_route(w: WeightModel, f: TargetPolynomial, n: int) -> OpaSolution:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    gram = assemble_gram(w, f, n)
    order = gram.order
    if gram.scaled_mp is not None:
        return _kernel_route_mp(w, f, n, gram)
    a_scaled = solve_gram(gram)
    inv_omega = 1.0 / w.weights(order)
    residual = np.zeros(order + 1, dtype=complex)
    for i, z in enumerate(f.zeros):
        residual += a_scaled[i] * _scaled_terms(z.conjugate(), inv_omega, gram.log_sigma[i])
    numerator = -residual
    numerator[0] += 1.0
    p, rem = divide_low_order(numerator, f.coefficients, n + 1)
    gap = _check_division(rem, residual)
    return OpaSolution(n, f, w, p, residual, Route.KERNEL, a_scaled, gram.log_sigma, gap, 53)


def _kernel_route_mp(w, f, n, gram) -> OpaSolution:
    order = gram.order
    a_mp = solve_gram_mp(gram)
    with mp_context():
        omega = w.weights_mp(order)
        zc = [mpmath.conj(z) for z in zeros_mp(f)]
        powers = [a / s for a, s in zip(a_mp, gram.sigma_mp)]
        residual = []
        for k in range(order + 1):
            residual.append(mpmath.fsum(powers) / omega[k])
            powers = [c * z for c, z in zip(powers, zc)]
        fc = _poly_from_roots_mp(zeros_mp(f))
        numerator = [-r for r in residual]
        numerator[0] += 1
        p = _divide_low_order_mp(numerator, fc, n + 1)
        prod = _multiply_mp(p, fc)
        rem = [numerator[k] - prod[k] for k in range(order + 1)]
        to_c = lambda xs: np.array([complex(x) for x in xs], dtype=complex)
        residual_c = to_c(residual)
        gap = _check_division(to_c(rem), residual_c)
        a_c = to_c(a_mp)
        return OpaSolution(n, f, w, to_c(p), residual_c, Route.KERNEL, a_c,
                           gram.log_sigma, gap, get_bits())


def _poly_from_roots_mp(zeros) -> list:
    c = [mpmath.mpc(1)]
    for z in zeros:
        nxt = [mpmath.mpc(0)] * (len(c) + 1)
        for k, a in enumerate(c):
            nxt[k] -= z * a
            nxt[k + 1] += a
        c = nxt
    return c


def _multiply_mp(a: list, b: list) -> list:
    out = [mpmath.mpc(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _divide_low_order_mp(num: list, f: list, length: int) -> list:
    deg = len(f) - 1
    q = []
    for j in range(length):
        acc = num[j] if j < len(num) else mpmath.mpc(0)
        for i in range(1, min(j, deg) + 1):
            acc -= f[i] * q[j - i]
        q.append(acc / f[0])
    return q


def _normal_band(w: WeightModel, fc: np.ndarray, n: int) -> np.ndarray:
    """Upper banded storage of ``M[j, k] = <z^k f, z^j f>_omega`` (j, k <= n).

    ``M[j, j+t] = sum_{i=0}^{d-t} omega_{j+t+i} f_i conj(f_{i+t})``.
    """
    d = fc.size - 1
    omega = w.weights(n + d)
    ab = np.zeros((d + 1, n + 1), dtype=complex)
    j = np.arange(n + 1)
    for t in range(min(d, n) + 1):
        jj = j[: n + 1 - t]
        acc = np.zeros(jj.size, dtype=complex)
        for i in range(d - t + 1):
            acc += omega[jj + t + i] * fc[i] * np.conj(fc[i + t])
        if t == 0:
            acc = acc.real.astype(complex)
        ab[d - t, t:] = acc
    return ab


def opa_normal_equations(w: WeightModel, f: TargetPolynomial, n: int) -> OpaSolution:
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if get_bits() > 53:
        return _normal_equations_mp(w, f, n)
    fc = f.coefficients
    ab = _normal_band(w, fc, n)
    rhs = np.zeros(n + 1, dtype=complex)
    rhs[0] = w.weight_at(0) * np.conj(fc[0])
    if n == 0:
        # 1x1 system; scipy's tridiagonal branch rejects it
        if not ab[-1, 0].real > 0:
            raise IllConditionedError("normal equations are singular at n = 0")
        p = rhs / ab[-1, 0].real
    else:
        p = _solve_band(ab, rhs)
    residual = -multiply(p, fc)
    residual[0] += 1.0
    return OpaSolution(n, f, w, p, residual, Route.NORMAL, bits=53)


def _solve_band(ab: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return solveh_banded(ab, rhs, lower=False, check_finite=True)
    except np.linalg.LinAlgError:
        raise IllConditionedError(
            "banded Cholesky of the normal equations failed; extended precision advised"
        ) from None


def _normal_equations_mp(w, f, n) -> OpaSolution:
    with mp_context():
        fc = _poly_from_roots_mp(zeros_mp(f))
        d = len(fc) - 1
        omega = w.weights_mp(n + d)
        # band[t][j] = M[j, j+t]
        band = []
        for t in range(min(d, n) + 1):
            row = []
            for j in range(n + 1 - t):
                row.append(mpmath.fsum(
                    omega[j + t + i] * fc[i] * mpmath.conj(fc[i + t]) for i in range(d - t + 1)
                ))
            band.append(row)
        rhs = [mpmath.mpc(0)] * (n + 1)
        rhs[0] = omega[0] * mpmath.conj(fc[0])
        p = _banded_cholesky_solve_mp(band, rhs)
        prod = _multiply_mp(p, fc)
        residual = [-x for x in prod]
        residual[0] += 1
        to_c = lambda xs: np.array([complex(x) for x in xs], dtype=complex)
        return OpaSolution(n, f, w, to_c(p), to_c(residual), Route.NORMAL, bits=get_bits())


def _banded_cholesky_solve_mp(band: list, rhs: list) -> list:
    """Solve ``M x = rhs`` for Hermitian positive definite banded M.

    ``band[t][j] = M[j, j+t]``.  Factor ``M = U^H U`` with U upper banded.
    """
    size = len(rhs)
    width = len(band) - 1
    U = [dict() for _ in range(size)]
    for j in range(size):
        s = mpmath.re(band[0][j]) - mpmath.fsum(
            abs(U[i][j]) ** 2 for i in range(max(0, j - width), j)
        )
        if s <= 0:
            raise IllConditionedError("banded Cholesky failed at extended precision")
        U[j][j] = mpmath.sqrt(s)
        for k in range(j + 1, min(size, j + width + 1)):
            t = k - j
            acc = band[t][j] - mpmath.fsum(
                mpmath.conj(U[i][j]) * U[i][k] for i in range(max(0, k - width), j)
            )
            U[j][k] = acc / U[j][j]
    y = []
    for j in range(size):
        acc = rhs[j] - mpmath.fsum(
            mpmath.conj(U[i][j]) * y[i] for i in range(max(0, j - width), j)
        )
        y.append(acc / mpmath.conj(U[j][j]))
    x = [mpmath.mpc(0)] * size
    for j in reversed(range(size)):
        acc = y[j] - mpmath.fsum(U[j][k] * x[k] for k in range(j + 1, min(size, j + width + 1)))
        x[j] = acc / U[j][j]
    return x


def residual_norm_sq(sol: OpaSolution) -> float:
    """``||1 - p_n f||^2``, which equals ``d_{0,n}``.

    The coefficient energy ``sum |d_k|^2 omega_k`` is computed alongside and
    must agree to 1e-8 relative.
    """
    d0 = sol.d0
    energy = math.fsum(
        (np.abs(sol.residual) ** 2 * sol.weight.weights(sol.residual.size - 1)).tolist()
    )
    if not (d0 > 0 and abs(d0 - energy) <= NORM_TOL * energy):
        raise ConsistencyError(
            f"d_0 = {d0!r} disagrees with ||residual||^2 = {energy!r} at n = {sol.n}"
        )
    return d0


def wiener_norm(sol: OpaSolution) -> float:
    """Sum of absolute values of the residual coefficients."""
    return math.fsum(np.abs(sol.residual).tolist())


def evaluate_residual(sol: OpaSolution, points) -> np.ndarray:
    return horner(sol.residual, points)


def route_gap(a: OpaSolution, b: OpaSolution) -> float:
    """Largest coefficient difference relative to the largest coefficient."""
    size = max(a.residual.size, b.residual.size)
    ra = np.zeros(size, dtype=complex)
    rb = np.zeros(size, dtype=complex)
    ra[: a.residual.size] = a.residual
    rb[: b.residual.size] = b.residual
    return float(np.max(np.abs(ra - rb)) / np.max(np.abs(ra)))
