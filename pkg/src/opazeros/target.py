"""Monic target polynomials described by their zero sets, plus coefficient helpers.

Coefficient arrays are stored lowest degree first throughout the package:
``c[k]`` is the coefficient of ``z**k``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainError

# |z| within this of 1 counts as a boundary zero and is snapped onto the circle
UNIMODULAR_TOL = 1e-12
DISTINCT_TOL = 1e-12


def _argument(z: complex) -> float:
    """Argument in [0, 2*pi)."""
    a = cmath.phase(z)
    return a + 2 * math.pi if a < 0 else a


@dataclass(frozen=True)
class TargetPolynomial:
    """The monic polynomial ``f(z) = prod (z - z_i)`` with validated simple zeros.

    Zeros are ordered by modulus, ties broken by argument in [0, 2*pi).  The
    first ``d1`` zeros lie exactly on the unit circle, the rest strictly outside
    the closed disk.
    """

    zeros: tuple[complex, ...]
    d1: int

    @classmethod
    def from_zeros(cls, zeros: Iterable[complex]) -> "TargetPolynomial":
        pts = [complex(z) for z in zeros]
        if not pts:
            raise DomainError("at least one zero is required")
        for z in pts:
            if not (math.isfinite(z.real) and math.isfinite(z.imag)):
                raise DomainError(f"zero {z} is not finite")
        on_circle, outside = [], []
        for z in pts:
            r = abs(z)
            if r < 1 - UNIMODULAR_TOL:
                raise DomainError(f"zero inside open unit disk: {z}")
            if abs(r - 1) <= UNIMODULAR_TOL:
                on_circle.append(z / r)
            else:
                outside.append(z)
        snapped = on_circle + outside
        for i in range(len(snapped)):
            for j in range(i):
                if abs(snapped[i] - snapped[j]) <= DISTINCT_TOL:
                    raise DomainError(
                        f"simple zeros required: {snapped[j]} and {snapped[i]} coincide"
                    )
        on_circle.sort(key=_argument)
        outside.sort(key=lambda z: (abs(z), _argument(z)))
        return cls(tuple(on_circle + outside), len(on_circle))

    @property
    def d(self) -> int:
        return len(self.zeros)

    @property
    def boundary(self) -> tuple[complex, ...]:
        return self.zeros[: self.d1]

    @property
    def exterior(self) -> tuple[complex, ...]:
        return self.zeros[self.d1:]

    @property
    def is_critical(self) -> bool:
        return self.d1 >= 1

    @cached_property
    def coefficients(self) -> np.ndarray:
        """Coefficients of f, lowest degree first; the last entry is 1."""
        c = npoly.polyfromroots(np.array(self.zeros, dtype=complex))
        c[-1] = 1.0
        return c

    def boundary_angles(self) -> list[float]:
        """Arguments of the boundary zeros in [-pi, pi)."""
        out = []
        for z in self.boundary:
            a = cmath.phase(z)
            out.append(-math.pi if a >= math.pi else a)
        return out

    def rotated(self, phase: complex) -> "TargetPolynomial":
        """The polynomial whose zeros are ``phase * z_i`` (``|phase| = 1``)."""
        return TargetPolynomial.from_zeros([phase * z for z in self.zeros])

    def to_spec(self) -> list[dict[str, float]]:
        return [{"re": z.real, "im": z.imag} for z in self.zeros]


def horner(coeffs: Sequence[complex] | np.ndarray, points) -> np.ndarray:
    """Evaluate the ascending-order polynomial at an array of points."""
    c = np.asarray(coeffs, dtype=complex)
    x = np.asarray(points, dtype=complex)
    acc = np.zeros_like(x)
    for a in c[::-1]:
        acc = acc * x + a
    return acc


def multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def divide_low_order(numerator: np.ndarray, f: np.ndarray, quotient_len: int) -> tuple[np.ndarray, np.ndarray]:
    """Divide by ``f`` from the constant term upwards.

    Returns ``(q, remainder)`` with ``q`` of length ``quotient_len`` and
    ``remainder = numerator - q * f`` (full length).  Dividing from the low end
    is stable when the zeros of ``f`` lie on or outside the unit circle, since
    the recurrence's homogeneous solutions are then powers of ``1/z_i``.
    """
    num = np.asarray(numerator, dtype=complex)
    f = np.asarray(f, dtype=complex)
    if f[0] == 0:
        raise DomainError("cannot divide from the low end: f(0) = 0")
    q = np.zeros(quotient_len, dtype=complex)
    deg = f.size - 1
    for j in range(quotient_len):
        acc = num[j] if j < num.size else 0.0
        lo = max(0, j - deg)
        if j > lo:
            acc -= np.dot(f[j - lo:0:-1], q[lo:j])
        q[j] = acc / f[0]
    prod = multiply(q, f)
    size = max(prod.size, num.size)
    rem = np.zeros(size, dtype=complex)
    rem[: num.size] += num
    rem[: prod.size] -= prod
    return q, rem
