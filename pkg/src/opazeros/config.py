"""Declarative experiment description, read from JSON.

Every key is checked; unknown keys are errors so that a typo can never
silently fall back to a default.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .errors import ConfigError, DomainError, WeightRangeError
from .precision import SUPPORTED_BITS
from .target import TargetPolynomial
from .weights import WeightModel

FORMATS = ("csv", "json")
_TOP_KEYS = {"weight", "zeros", "n_range", "precision", "subsequence", "outputs", "seeds"}
_REQUIRED = ("weight", "zeros", "n_range")


@dataclass(frozen=True)
class Subsequence:
    eps: float
    max_scan: int


@dataclass
class ExperimentConfig:
    weight: WeightModel
    target: TargetPolynomial
    start: int
    end: int
    step: int = 1
    bits: int = 53
    subsequence: Subsequence | None = None
    directory: str = "out"
    formats: tuple[str, ...] = FORMATS
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)

    @property
    def ns(self) -> list[int]:
        return list(range(self.start, self.end + 1, self.step))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "weight": self.weight.to_spec(),
            "zeros": self.target.to_spec(),
            "n_range": {"start": self.start, "end": self.end, "step": self.step},
            "precision": {"bits": self.bits},
            "outputs": {"directory": self.directory, "formats": list(self.formats)},
            "seeds": self.seed,
        }
        if self.subsequence is not None:
            out["subsequence"] = {"eps": self.subsequence.eps,
                                  "max_scan": self.subsequence.max_scan}
        return out


def _only(obj: Any, allowed: set[str], where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(where, "expected a JSON object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where}.{extra[0]}" if where else extra[0], "unknown key")
    return obj


def _int(value: Any, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(where, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(where, f"must be >= {minimum}, got {value}")
    return value


def _real(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigError(where, f"expected a finite number, got {value!r}")
    return float(value)


def parse_config(data: Any) -> ExperimentConfig:
    """Validate a decoded JSON document and build the configuration."""
    data = _only(data, _TOP_KEYS, "")
    for key in _REQUIRED:
        if key not in data:
            raise ConfigError(key, "required key missing")

    try:
        weight = WeightModel.from_spec(data["weight"])
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError("weight", str(exc)) from None

    zeros_spec = data["zeros"]
    if not isinstance(zeros_spec, list) or not zeros_spec:
        raise ConfigError("zeros", "expected a nonempty list of {re, im} objects")
    zeros = []
    for i, item in enumerate(zeros_spec):
        where = f"zeros[{i}]"
        item = _only(item, {"re", "im"}, where)
        if "re" not in item:
            raise ConfigError(f"{where}.re", "required key missing")
        zeros.append(complex(_real(item["re"], f"{where}.re"),
                             _real(item.get("im", 0.0), f"{where}.im")))
    try:
        target = TargetPolynomial.from_zeros(zeros)
    except DomainError as exc:
        raise ConfigError("zeros", str(exc)) from None

    rng = _only(data["n_range"], {"start", "end", "step"}, "n_range")
    for key in ("start", "end"):
        if key not in rng:
            raise ConfigError(f"n_range.{key}", "required key missing")
    start = _int(rng["start"], "n_range.start", 0)
    end = _int(rng["end"], "n_range.end", 0)
    step = _int(rng.get("step", 1), "n_range.step", 1)
    if end < start:
        raise ConfigError("n_range", f"empty range: end {end} < start {start}")

    bits = 53
    if "precision" in data:
        prec = _only(data["precision"], {"bits"}, "precision")
        bits = _int(prec.get("bits", 53), "precision.bits")
        if bits not in SUPPORTED_BITS:
            raise ConfigError("precision.bits", f"must be one of {list(SUPPORTED_BITS)}")

    sub = None
    if data.get("subsequence") is not None:
        s = _only(data["subsequence"], {"eps", "max_scan"}, "subsequence")
        eps = _real(s.get("eps", 0.1), "subsequence.eps")
        if not 0 < eps < math.pi:
            raise ConfigError("subsequence.eps", "must lie in (0, pi)")
        sub = Subsequence(eps, _int(s.get("max_scan", end), "subsequence.max_scan", 1))

    directory, formats = "out", FORMATS
    if "outputs" in data:
        o = _only(data["outputs"], {"directory", "formats"}, "outputs")
        directory = o.get("directory", directory)
        if not isinstance(directory, str) or not directory:
            raise ConfigError("outputs.directory", "expected a nonempty path string")
        fmts = o.get("formats", list(FORMATS))
        if not isinstance(fmts, list) or not fmts or any(x not in FORMATS for x in fmts):
            raise ConfigError("outputs.formats", f"expected a nonempty subset of {list(FORMATS)}")
        formats = tuple(x for x in FORMATS if x in fmts)

    seed = _int(data.get("seeds", 0), "seeds", 0)

    cfg = ExperimentConfig(weight, target, start, end, step, bits, sub, directory, formats,
                           seed, data)
    last = max(end, sub.max_scan if sub else end) + target.d
    if weight.max_index is not None and last > weight.max_index:
        err = WeightRangeError(last, weight.max_index + 1)
        raise ConfigError("weight.values", str(err))
    return cfg


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    return parse_config(data)
