"""Weight sequences for weighted Hardy spaces and their reciprocal partial sums.

A weight is a positive sequence ``omega_k`` with ``omega_0 = 1``.  Two kinds are
supported: the Dirichlet-type family ``omega_k = (k + 1)**alpha`` and an
explicit table of values.  ``S_n = sum_{k<=n} 1/omega_k`` is the diagonal value
of the degree-``n`` truncated kernel at unimodular points.
"""
from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from typing import Any, Sequence

import mpmath
import numpy as np

from .errors import ConfigError, WeightRangeError

_CHUNK = 1024


class WeightKind(str, enum.Enum):
    DIRICHLET = "dirichlet"
    TABLE = "table"


class DivergenceVerdict(str, enum.Enum):
    DIVERGES = "diverges-analytically"
    CONVERGES = "converges-analytically"
    INCONCLUSIVE = "inconclusive"


class WeightModel:
    """A weight sequence with lazily materialized values and partial sums.

    Instances are read-only from the outside.  The cache only ever grows, and
    every cached entry is a pure function of its index, so concurrent readers
    see identical values regardless of who extended the cache first.
    """

    def __init__(self, kind: WeightKind | str, alpha: float | None = None,
                 values: Sequence[float] | None = None):
        self.kind = WeightKind(kind)
        if self.kind is WeightKind.DIRICHLET:
            if alpha is None or not math.isfinite(alpha):
                raise ValueError("dirichlet weights need a finite exponent alpha")
            self.alpha = float(alpha)
            self.values = None
        else:
            if values is None or len(values) == 0:
                raise ValueError("table weights need a nonempty list of values")
            table = np.asarray(values, dtype=float)
            if not np.all(np.isfinite(table)) or np.any(table <= 0):
                raise ValueError("table weights must be finite and positive")
            self.alpha = None
            self.values = tuple(float(v) for v in table)
        self._lock = threading.Lock()
        self._omega = np.empty(0)
        self._sums = np.empty(0)

    @classmethod
    def dirichlet(cls, alpha: float) -> "WeightModel":
        return cls(WeightKind.DIRICHLET, alpha=alpha)

    @classmethod
    def table(cls, values: Sequence[float]) -> "WeightModel":
        return cls(WeightKind.TABLE, values=values)

    @classmethod
    def from_spec(cls, spec: dict[str, Any]) -> "WeightModel":
        """Build from the config form ``{"kind": ..., "alpha"|"values": ...}``."""
        if not isinstance(spec, dict):
            raise ConfigError("weight", "must be an object")
        kind = spec.get("kind")
        if kind == "dirichlet":
            _only_keys(spec, {"kind", "alpha"})
            alpha = spec.get("alpha")
            if isinstance(alpha, bool) or not isinstance(alpha, (int, float)):
                raise ConfigError("weight.alpha", "must be a number")
            return cls.dirichlet(float(alpha))
        if kind == "table":
            _only_keys(spec, {"kind", "values"})
            values = spec.get("values")
            if not isinstance(values, list) or not values:
                raise ConfigError("weight.values", "must be a nonempty list of numbers")
            try:
                return cls.table(values)
            except (TypeError, ValueError) as exc:
                raise ConfigError("weight.values", str(exc)) from None
        raise ConfigError("weight.kind", f"unknown weight kind {kind!r}")

    def to_spec(self) -> dict[str, Any]:
        if self.kind is WeightKind.DIRICHLET:
            return {"kind": "dirichlet", "alpha": self.alpha}
        return {"kind": "table", "values": list(self.values)}

    def __repr__(self) -> str:
        if self.kind is WeightKind.DIRICHLET:
            return f"WeightModel.dirichlet({self.alpha!r})"
        return f"WeightModel.table(<{len(self.values)} values>)"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, WeightModel):
            return NotImplemented
        return self.to_spec() == other.to_spec()

    def __hash__(self) -> int:
        return hash((self.kind, self.alpha, self.values))

    def __getstate__(self) -> dict[str, Any]:
        state = self.__dict__.copy()
        del state["_lock"]
        return state

    def __setstate__(self, state: dict[str, Any]) -> None:
        self.__dict__.update(state)
        self._lock = threading.Lock()

    @property
    def max_index(self) -> int | None:
        """Largest index that can be materialized, or None when unbounded."""
        return None if self.values is None else len(self.values) - 1

    def _ensure(self, n: int) -> None:
        if n < self._omega.size:
            return
        if self.values is not None and n >= len(self.values):
            raise WeightRangeError(n, len(self.values))
        with self._lock:
            start = self._omega.size
            if n < start:
                return
            stop = n + 1
            if self.values is None:
                stop = max(stop, start + _CHUNK)
                new = np.arange(start + 1, stop + 1, dtype=float) ** self.alpha
            else:
                stop = len(self.values)
                new = np.array(self.values[start:stop])
            omega = np.concatenate([self._omega, new])
            sums = np.concatenate([self._sums, _prefix_sums(1.0 / new, self._sums)])
            # publish sums before omega: readers gate on omega's size
            self._sums = sums
            self._omega = omega

    def weight_at(self, k: int) -> float:
        if k < 0:
            raise ValueError(f"weight index must be >= 0, got {k}")
        self._ensure(k)
        return float(self._omega[k])

    def weights(self, n: int) -> np.ndarray:
        """Array ``omega_0 .. omega_n`` (a read-only view)."""
        if n < 0:
            return np.empty(0)
        self._ensure(n)
        out = self._omega[: n + 1]
        out.flags.writeable = False
        return out

    def partial_sum(self, n: int) -> float:
        if n < 0:
            raise ValueError(f"partial sum index must be >= 0, got {n}")
        self._ensure(n)
        return float(self._sums[n])

    def partial_sums(self, n: int) -> np.ndarray:
        """Array ``S_0 .. S_n``."""
        self._ensure(n)
        out = self._sums[: n + 1]
        out.flags.writeable = False
        return out

    # extended precision: recomputed on demand at the current mpmath precision

    def weight_mp(self, k: int) -> mpmath.mpf:
        if self.values is None:
            return mpmath.power(k + 1, mpmath.mpf(self.alpha))
        if k >= len(self.values):
            raise WeightRangeError(k, len(self.values))
        return mpmath.mpf(self.values[k])

    def weights_mp(self, n: int) -> list[mpmath.mpf]:
        return [self.weight_mp(k) for k in range(n + 1)]

    def partial_sum_mp(self, n: int) -> mpmath.mpf:
        return mpmath.fsum(1 / w for w in self.weights_mp(n))


def _only_keys(spec: dict[str, Any], allowed: set[str]) -> None:
    for key in spec:
        if key not in allowed:
            raise ConfigError(f"weight.{key}", "unknown key")


def _prefix_sums(terms: np.ndarray, previous: np.ndarray) -> np.ndarray:
    """Neumaier-compensated running sums of ``terms`` continuing ``previous``."""
    total = float(previous[-1]) if previous.size else 0.0
    comp = 0.0
    out = np.empty(terms.size)
    for i, t in enumerate(terms.tolist()):
        s = total + t
        if abs(total) >= abs(t):
            comp += (total - s) + t
        else:
            comp += (t - s) + total
        total = s
        out[i] = total + comp
    return out


def weight_at(w: WeightModel, k: int) -> float:
    return w.weight_at(k)


def partial_sum(w: WeightModel, n: int) -> float:
    return w.partial_sum(n)


@dataclass
class AdmissibilityReport:
    normalized: bool
    monotone: bool
    monotone_direction: str
    ratio_diagnostic: list[tuple[int, float]]
    ratio_trend_ok: bool
    divergence_checkpoints: list[tuple[int, float]]
    divergence_verdict: DivergenceVerdict
    epsilon: float
    growth_diagnostic: list[tuple[int, float, float]]
    hard_failures: list[str] = field(default_factory=list)

    @property
    def admissible(self) -> bool | None:
        """True/False when decidable, None when only trends are available."""
        if self.hard_failures:
            return False
        if self.divergence_verdict is DivergenceVerdict.DIVERGES:
            return True
        if self.divergence_verdict is DivergenceVerdict.CONVERGES:
            return False
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "normalized": self.normalized,
            "monotone": self.monotone,
            "monotone_direction": self.monotone_direction,
            "ratio_diagnostic": [list(r) for r in self.ratio_diagnostic],
            "ratio_trend_ok": self.ratio_trend_ok,
            "divergence_checkpoints": [list(r) for r in self.divergence_checkpoints],
            "divergence_verdict": self.divergence_verdict.value,
            "epsilon": self.epsilon,
            "growth_diagnostic": [list(r) for r in self.growth_diagnostic],
            "hard_failures": list(self.hard_failures),
            "admissible": self.admissible,
        }


def _checkpoints(n_max: int) -> list[int]:
    points = []
    n = 16
    while n < n_max:
        points.append(n)
        n *= 2
    points.append(n_max)
    return points


def check_admissibility(w: WeightModel, n_max: int, epsilon: float = 0.1) -> AdmissibilityReport:
    """Finite-scale diagnostics for the weight conditions.

    Only normalization and monotonicity are hard gates.  The ratio, divergence
    and growth conditions are limits, so for tabulated weights they are
    reported as trends and the divergence verdict stays inconclusive.
    """
    if n_max < 16:
        raise ValueError(f"n_max must be >= 16, got {n_max}")
    omega = w.weights(n_max)
    sums = w.partial_sums(n_max)
    failures = []

    normalized = omega[0] == 1.0
    if not normalized:
        failures.append(f"omega_0 = {omega[0]!r}, expected 1")
    steps = np.diff(omega)
    if np.all(steps >= 0):
        direction = "constant" if np.all(steps == 0) else "non-decreasing"
    elif np.all(steps <= 0):
        direction = "non-increasing"
    else:
        direction = "none"
    monotone = direction != "none"
    if not monotone:
        failures.append("weight sequence is not monotone")

    checkpoints = _checkpoints(n_max)
    ratios = [(n, float(omega[n] / omega[n - math.isqrt(n)])) for n in checkpoints]
    deviations = [abs(r - 1.0) for _, r in ratios]
    # the ratio must head to 1: last deviation no larger than the first, and small
    trend_ok = deviations[-1] <= deviations[0] + 1e-12 and deviations[-1] < 0.5

    if w.kind is WeightKind.DIRICHLET:
        verdict = DivergenceVerdict.DIVERGES if w.alpha <= 1 else DivergenceVerdict.CONVERGES
    else:
        verdict = DivergenceVerdict.INCONCLUSIVE

    growth = []
    running_min = np.minimum.accumulate(omega)
    for n in checkpoints:
        sup_ratio = float(omega[n] / running_min[n])
        growth.append((n, sup_ratio, sup_ratio / n ** (1.0 + epsilon)))

    return AdmissibilityReport(
        normalized=bool(normalized),
        monotone=monotone,
        monotone_direction=direction,
        ratio_diagnostic=ratios,
        ratio_trend_ok=bool(trend_ok),
        divergence_checkpoints=[(n, float(sums[n])) for n in checkpoints],
        divergence_verdict=verdict,
        epsilon=epsilon,
        growth_diagnostic=growth,
        hard_failures=failures,
    )
