"""Truncated reproducing kernels, the kernel Gram matrix and the tail factor.

The truncated kernel of degree ``n`` is

    k_n(z, b) = sum_{k=0}^{n} conj(b)**k * z**k / omega_k.

For zeros outside the closed disk the Gram entries grow like
``|conj(z_m) z_l|**(n+d+1)``, so the Gram matrix is only ever held in the
symmetrically scaled form ``diag(1/sigma) E diag(1/sigma)`` with
``sigma_l = max(|z_l|, 1)**(n+d+1)``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import mpmath
import numpy as np

from .errors import DomainError, IllConditionedError
from .precision import is_extended, mp_context
from .target import TargetPolynomial
from .weights import WeightModel

# equilibrated condition numbers above these trigger an advisory / an error
COND_ADVISORY = 1e8
COND_SINGULAR = 1e13


class PrecisionAdvisory(UserWarning):
    """Extended precision is advised for this computation."""


def csum(terms: np.ndarray) -> complex:
    """Correctly rounded sum of complex terms (fsum on each part)."""
    terms = np.asarray(terms, dtype=complex)
    return complex(math.fsum(terms.real.tolist()), math.fsum(terms.imag.tolist()))


def _scaled_terms(base: complex, inv_omega: np.ndarray, log_scale: float) -> np.ndarray:
    """``base**k / omega_k * exp(-log_scale)`` for k = 0..len-1, overflow free."""
    k = np.arange(inv_omega.size, dtype=float)
    if base == 0:
        out = np.zeros(inv_omega.size, dtype=complex)
        out[0] = inv_omega[0] * math.exp(-log_scale)
        return out
    log_r = math.log(abs(base))
    theta = cmath.phase(base)
    mag = np.exp(k * log_r - log_scale) * inv_omega
    if theta == 0.0:
        return mag.astype(complex)
    # bases on the axes get exact unit powers
    if base.imag == 0.0:
        return mag * np.where(k % 2 == 0, 1.0, -1.0)
    if base.real == 0.0:
        unit = np.array([1, 1j, -1, -1j]) if base.imag > 0 else np.array([1, -1j, -1, 1j])
        return mag * unit[np.arange(inv_omega.size) % 4]
    return mag * np.exp(1j * (k * theta))


def kernel_scaled(w: WeightModel, n: int, z: complex, b: complex, log_scale: float) -> complex:
    """``k_n(z, b) * exp(-log_scale)`` in binary64."""
    inv_omega = 1.0 / w.weights(n)
    return csum(_scaled_terms(complex(b).conjugate() * complex(z), inv_omega, log_scale))


def kernel(w: WeightModel, n: int, z: complex, b: complex):
    """The truncated kernel ``k_n(z, b)``.

    Returns a Python complex at 53 bits and an ``mpmath.mpc`` at extended
    precision.  When ``|conj(b) z| > 1`` the sum is accumulated relative to its
    largest term; a result beyond the binary64 range raises OverflowError.
    """
    if n < 0:
        raise ValueError(f"kernel degree must be >= 0, got {n}")
    if is_extended():
        with mp_context():
            return kernel_mp(w, n, mpmath.mpc(z), mpmath.mpc(b))
    base = complex(b).conjugate() * complex(z)
    r = abs(base)
    log_scale = n * math.log(r) if r > 1 else 0.0
    value = kernel_scaled(w, n, z, b, log_scale)
    if log_scale == 0.0:
        return value
    log_mag = math.log(abs(value)) + log_scale if value != 0 else -math.inf
    if log_mag > 709.0:
        raise OverflowError(
            f"|k_{n}(z, b)| = exp({log_mag:.1f}) exceeds binary64 range; "
            "use kernel_scaled or extended precision"
        )
    return value * math.exp(log_scale)


def kernel_mp(w: WeightModel, n: int, z, b) -> mpmath.mpc:
    base = mpmath.conj(b) * z
    omega = w.weights_mp(n)
    terms = []
    power = mpmath.mpc(1)
    for k in range(n + 1):
        terms.append(power / omega[k])
        power *= base
    return mpmath.fsum(terms)


@dataclass
class TailFactor:
    N: int
    z: complex
    value: complex
    limit: complex
    deviation: float


def tail_factor(w: WeightModel, N: int, z: complex) -> TailFactor:
    """``C(N, z) = (sum_{k<=N} z**k / omega_k) * omega_N / z**(N+1)`` for ``|z| > 1``.

    Evaluated as ``x * sum_k (omega_N / omega_{N-k}) x**k`` with ``x = 1/z``.
    """
    z = complex(z)
    if not abs(z) > 1:
        raise DomainError(f"tail factor needs |z| > 1, got |z| = {abs(z)}")
    if N < 0:
        raise ValueError(f"N must be >= 0, got {N}")
    limit = 1 / (z - 1)
    if is_extended():
        with mp_context():
            x = 1 / mpmath.mpc(z)
            omega = w.weights_mp(N)
            terms = []
            power = x
            for k in range(N + 1):
                terms.append(omega[N] / omega[N - k] * power)
                power *= x
            value = complex(mpmath.fsum(terms))
    else:
        omega = w.weights(N)
        ratio = omega[N] / omega[::-1]
        x = 1 / z
        k = np.arange(1, N + 2, dtype=float)
        powers = np.exp(k * math.log(abs(x))) * np.exp(1j * k * cmath.phase(x))
        value = csum(ratio * powers)
    return TailFactor(N=N, z=z, value=value, limit=limit, deviation=abs(value - limit))


@dataclass
class KernelGram:
    """Scaled Gram matrix of truncated kernels at the zeros of f.

    ``scaled[l, m] = k_order(z_l, z_m) / (sigma_l sigma_m)``; ``log_sigma``
    holds ``log sigma_l``.  ``scaled_mp`` is filled at extended precision.
    """

    order: int
    zeros: tuple[complex, ...]
    scaled: np.ndarray
    log_sigma: np.ndarray
    partial_sum: float
    scaled_mp: object = field(default=None, repr=False)
    sigma_mp: object = field(default=None, repr=False)

    @property
    def d(self) -> int:
        return len(self.zeros)

    @property
    def scaling(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_sigma)

    @property
    def entries(self) -> np.ndarray:
        """The unscaled matrix E; raises OverflowError if not representable."""
        log_outer = self.log_sigma[:, None] + self.log_sigma[None, :]
        if np.max(log_outer) > 700:
            raise OverflowError("unscaled Gram entries exceed binary64 range")
        return self.scaled * np.exp(log_outer)

    def log_det(self) -> float:
        """``log det E`` computed from the scaled matrix."""
        if self.scaled_mp is not None:
            with mp_context():
                det = mpmath.re(mpmath.det(self.scaled_mp))
                if det <= 0:
                    raise IllConditionedError("Gram determinant is not positive")
                log_scaled = float(mpmath.log(det))
        else:
            L, diag = _equilibrated_cholesky(self.scaled)
            log_scaled = 2.0 * float(np.sum(np.log(np.real(np.diag(L))))) + 2.0 * float(
                np.sum(np.log(diag))
            )
        return log_scaled + 2.0 * float(np.sum(self.log_sigma))

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "zeros": [[z.real, z.imag] for z in self.zeros],
            "log_sigma": self.log_sigma.tolist(),
            "scaled_re": self.scaled.real.tolist(),
            "scaled_im": self.scaled.imag.tolist(),
            "partial_sum": self.partial_sum,
            "condition": equilibrated_condition(self.scaled),
        }


def _log_sigma(f: TargetPolynomial, order: int) -> np.ndarray:
    return np.array(
        [(order + 1) * math.log(abs(z)) if i >= f.d1 else 0.0 for i, z in enumerate(f.zeros)]
    )


def assemble_gram(w: WeightModel, f: TargetPolynomial, n: int) -> KernelGram:
    """Gram matrix ``e_{l,m} = k_{n+d}(z_l, z_m)`` in scaled form.

    Only the lower triangle is summed; the upper triangle is its conjugate
    mirror, so the result is exactly Hermitian.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    order = n + f.d
    zeros = f.zeros
    log_sigma = _log_sigma(f, order)
    S = w.partial_sum(order)
    inv_omega = 1.0 / w.weights(order)
    d = f.d
    scaled = np.zeros((d, d), dtype=complex)
    for l in range(d):
        for m in range(l + 1):
            if l == m and l < f.d1:
                scaled[l, l] = S
                continue
            base = zeros[m].conjugate() * zeros[l]
            val = csum(_scaled_terms(base, inv_omega, log_sigma[l] + log_sigma[m]))
            if l == m:
                val = complex(val.real, 0.0)
            scaled[l, m] = val
            scaled[m, l] = val.conjugate()
    scaled_mp = sigma_mp = None
    if is_extended():
        scaled_mp, sigma_mp = _assemble_scaled_mp(w, f, order)
        scaled = np.array(
            [[complex(scaled_mp[l, m]) for m in range(d)] for l in range(d)], dtype=complex
        )
    return KernelGram(order, zeros, scaled, log_sigma, S, scaled_mp, sigma_mp)


def zeros_mp(f: TargetPolynomial) -> list:
    """Zeros of f at the current mpmath precision, boundary zeros put exactly
    on the circle (binary64 values are only unimodular to about 1e-16)."""
    out = []
    for i, z in enumerate(f.zeros):
        z = mpmath.mpc(z)
        out.append(z / abs(z) if i < f.d1 else z)
    return out


def _assemble_scaled_mp(w: WeightModel, f: TargetPolynomial, order: int):
    with mp_context():
        zs = zeros_mp(f)
        sig = [abs(z) ** (order + 1) if i >= f.d1 else mpmath.mpf(1) for i, z in enumerate(zs)]
        omega = w.weights_mp(order)
        d = f.d
        M = mpmath.matrix(d, d)
        for l in range(d):
            for m in range(l + 1):
                if l == m and l < f.d1:
                    val = mpmath.fsum(1 / om for om in omega)
                else:
                    base = mpmath.conj(zs[m]) * zs[l]
                    power = mpmath.mpc(1)
                    terms = []
                    for k in range(order + 1):
                        terms.append(power / omega[k])
                        power *= base
                    val = mpmath.fsum(terms) / (sig[l] * sig[m])
                    if l == m:
                        val = mpmath.mpc(mpmath.re(val), 0)
                M[l, m] = val
                M[m, l] = mpmath.conj(val)
        return M, sig


def equilibrated_condition(scaled: np.ndarray) -> float:
    diag = np.sqrt(np.abs(np.real(np.diag(scaled))))
    if np.any(diag == 0):
        return math.inf
    eq = scaled / np.outer(diag, diag)
    return float(np.linalg.cond(eq))


def _equilibrated_cholesky(scaled: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    diag = np.sqrt(np.real(np.diag(scaled)))
    if np.any(~(diag > 0)):
        raise IllConditionedError("Gram matrix has a nonpositive diagonal; extended precision advised")
    eq = scaled / np.outer(diag, diag)
    try:
        return np.linalg.cholesky(eq), diag
    except np.linalg.LinAlgError:
        raise IllConditionedError(
            "scaled Gram matrix is not numerically positive definite; extended precision advised"
        ) from None


def solve_gram(gram: KernelGram) -> np.ndarray:
    """Solve the scaled system for ``sigma_i * A_i`` where ``E A = (1, ..., 1)``.

    With ``E = D Es D`` (``D = diag(sigma)``) the unknown ``D A`` satisfies
    ``Es (D A) = D^{-1} 1``.  Cholesky on the diagonally equilibrated matrix
    doubles as the positive-definiteness check.
    """
    if gram.scaled_mp is not None:
        return np.array([complex(a) for a in solve_gram_mp(gram)], dtype=complex)
    with np.errstate(under="ignore"):
        rhs = np.exp(-gram.log_sigma).astype(complex)
    cond = equilibrated_condition(gram.scaled)
    if not cond < COND_SINGULAR:
        raise IllConditionedError(
            f"scaled Gram matrix is numerically singular (condition {cond:.2e}); "
            "extended precision advised"
        )
    if cond > COND_ADVISORY:
        warnings.warn(
            f"scaled Gram condition {cond:.2e}: extended precision advised",
            PrecisionAdvisory,
            stacklevel=2,
        )
    L, diag = _equilibrated_cholesky(gram.scaled)
    y = np.linalg.solve(L, rhs / diag)
    x = np.linalg.solve(L.conj().T, y)
    return x / diag


def solve_gram_mp(gram: KernelGram) -> list:
    """Extended-precision counterpart of :func:`solve_gram` (list of mpc)."""
    with mp_context():
        rhs = mpmath.matrix([1 / s for s in gram.sigma_mp])
        try:
            sol = mpmath.lu_solve(gram.scaled_mp, rhs)
        except ZeroDivisionError:
            raise IllConditionedError(
                "scaled Gram matrix is singular even at extended precision"
            ) from None
        return [sol[i] for i in range(gram.d)]
