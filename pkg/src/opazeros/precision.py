"""Working-precision setting shared by all numerical modules.

Binary64 (53-bit significand) is the default and runs on numpy.  Any larger
value switches the linear-algebra core to mpmath at that many bits.
"""
from __future__ import annotations

import contextlib
import contextvars
from typing import Iterator

import mpmath

SUPPORTED_BITS = (53, 113, 256)

_bits: contextvars.ContextVar[int] = contextvars.ContextVar("opazeros_bits", default=53)


def get_bits() -> int:
    return _bits.get()


def is_extended() -> bool:
    return _bits.get() > 53


def set_bits(bits: int) -> None:
    _check(bits)
    _bits.set(bits)


@contextlib.contextmanager
def working_precision(bits: int) -> Iterator[int]:
    """Temporarily run every computation at ``bits`` significand bits."""
    _check(bits)
    token = _bits.set(bits)
    try:
        yield bits
    finally:
        _bits.reset(token)


@contextlib.contextmanager
def mp_context() -> Iterator[mpmath.ctx_mp.MPContext]:
    """An mpmath context pinned to the current working precision."""
    with mpmath.workprec(get_bits()):
        yield mpmath.mp


def _check(bits: int) -> None:
    if bits not in SUPPORTED_BITS:
        raise ValueError(f"precision must be one of {SUPPORTED_BITS} bits, got {bits}")
