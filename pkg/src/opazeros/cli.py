"""Command-line experiment runner.

    opazeros run --config exp.json --out results/ --jobs 4
    opazeros verify --criteria 1,2,10

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import platform
import sys
from dataclasses import replace
from pathlib import Path
from typing import Iterable, Sequence

import mpmath
import numpy as np
import scipy

from . import __version__
from .asymptotics import plan_subsequence
from .config import FORMATS, ExperimentConfig, load_config
from .errors import ConfigError, NumericalError
from .pipeline import STAGES, SweepResult, sweep
from .precision import SUPPORTED_BITS, working_precision
from .weights import check_admissibility

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_VERIFY = 3

HN_COLUMNS = ["n", "maxcircle", "d0", "dlead", "H", "logH_over_n"]
GN_COLUMNS = ["n", "re_G", "im_G", "ratio", "re_ratio", "im_ratio"]
ZERO_COLUMNS = ["n", "re", "im", "modulus", "argument"]
DEFAULT_PLAN_EPS = 0.1


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


class Writer:
    """Writes tables as CSV and/or JSON into one output directory."""

    def __init__(self, directory: str | Path, formats: Sequence[str]):
        self.dir = Path(directory)
        self.formats = tuple(formats)
        self.written: list[str] = []

    def _path(self, name: str) -> Path:
        self.dir.mkdir(parents=True, exist_ok=True)
        self.written.append(name)
        return self.dir / name

    def table(self, stem: str, columns: list[str], rows: Iterable[Sequence]) -> None:
        rows = [list(r) for r in rows]
        if "csv" in self.formats:
            with open(self._path(f"{stem}.csv"), "w", newline="") as fh:
                out = csv.writer(fh, lineterminator="\n")
                out.writerow(columns)
                out.writerows([_cell(v) for v in r] for r in rows)
        if "json" in self.formats:
            self.json(f"{stem}.json", [dict(zip(columns, r)) for r in rows])

    def json(self, name: str, obj) -> None:
        path = self._path(name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=False)
            fh.write("\n")


def _environment(bits: int) -> dict:
    return {
        "package": __version__,
        "precision_bits": bits,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "mpmath": mpmath.__version__,
    }


# table builders: each takes sweep records and returns rows


def approximant_rows(cfg: ExperimentConfig, records: list[dict]):
    d = cfg.target.d
    columns = ["n", "d0", "wiener"] + [f"abs_A_{i + 1}" for i in range(d)] + ["route_gap"]
    rows = [[r["n"], r["d0"], r["wiener"], *r["abs_A"], r["route_gap"]]
            for r in records if "error" not in r]
    return columns, rows


def zero_rows(records: list[dict]):
    rows = []
    for r in records:
        if "error" in r:
            continue
        for re, im in r["zeros"]:
            z = complex(re, im)
            rows.append([r["n"], re, im, abs(z), math.atan2(im, re) % (2 * math.pi)])
    return rows


def equidist_rows(records: list[dict]):
    moments = 0
    for r in records:
        if "equidistribution" in r:
            moments = len(r["equidistribution"]["weyl"])
            break
    columns = ["n", "N", "trimmed", "discrepancy", "weyl_max", "radial_max", "shell_fraction"]
    columns += [f"weyl_{m + 1}" for m in range(moments)]
    rows = []
    for r in records:
        if "error" in r:
            continue
        e = r["equidistribution"]
        rows.append([r["n"], len(r["zeros"]), r["trimmed"], e["discrepancy"], r["weyl_max"],
                     e["radial_max"], e["shell_fraction"], *e["weyl"]])
    return columns, rows


def hn_rows(records: list[dict]):
    return [[r["n"], *(r["H"][k] for k in HN_COLUMNS[1:])]
            for r in records if "error" not in r and "skipped" not in r["H"]]


def gn_rows(records: list[dict]):
    rows = []
    for r in records:
        if "error" in r or "G" not in r:
            continue
        g = r["G"]
        ratio = g["ratio"]
        if ratio is None:
            rows.append([r["n"], *g["G_n"], None, None, None])
        else:
            rows.append([r["n"], *g["G_n"], abs(complex(*ratio)), *ratio])
    return rows


def adecay_rows(cfg: ExperimentConfig, records: list[dict]):
    rows = []
    for r in records:
        if "error" in r:
            continue
        for i, (z, v) in enumerate(zip(cfg.target.zeros, r["a_decay"])):
            rows.append([r["n"], i + 1, z.real, z.imag, v])
    return rows


def make_plan(cfg: ExperimentConfig) -> dict:
    if cfg.target.d1 == 0:
        return {"angles": [], "indices": [], "advisory": "f has no boundary zeros; no plan needed"}
    eps = cfg.subsequence.eps if cfg.subsequence else DEFAULT_PLAN_EPS
    n_max = cfg.subsequence.max_scan if cfg.subsequence else cfg.end
    n_max = max(n_max, cfg.start)
    plan = plan_subsequence(cfg.target.boundary_angles(), eps, cfg.start, n_max,
                            n_max - cfg.start + 1)
    return plan.to_dict()


def _run_sweep(cfg: ExperimentConfig, args, stages, ns=None, gram=False) -> SweepResult:
    return sweep(cfg.weight, cfg.target, cfg.ns if ns is None else ns, cfg.bits, stages,
                 jobs=max(1, args.jobs), gram=gram)


def _report_failures(result: SweepResult) -> int:
    for r in result.records:
        if "error" in r:
            print(f"n={r['n']}: {r['error']}", file=sys.stderr)
    if result.aborted:
        print("more than half of the requested n failed; run aborted", file=sys.stderr)
    return EXIT_NUMERICAL if result.failures else EXIT_OK


def _finish(writer: Writer) -> None:
    for name in writer.written:
        print(f"wrote {writer.dir / name}")


# subcommands


def cmd_validate_weight(cfg: ExperimentConfig, args) -> int:
    n_max = max(16, cfg.end + cfg.target.d)
    report = check_admissibility(cfg.weight, n_max)
    writer = Writer(cfg.directory, cfg.formats)
    writer.json("admissibility.json", report.to_dict())
    if "csv" in cfg.formats:
        writer.table("ratio_diagnostic", ["n", "ratio"], report.ratio_diagnostic)
    verdict = report.divergence_verdict.value
    print(f"normalized={report.normalized} monotone={report.monotone} "
          f"ratio_trend_ok={report.ratio_trend_ok} divergence={verdict}")
    for msg in report.hard_failures:
        print(f"hard failure: {msg}", file=sys.stderr)
    _finish(writer)
    return EXIT_VERIFY if report.hard_failures else EXIT_OK


def cmd_approximant(cfg: ExperimentConfig, args) -> int:
    result = _run_sweep(cfg, args, ("approximant",), gram=args.gram)
    writer = Writer(cfg.directory, cfg.formats)
    columns, rows = approximant_rows(cfg, result.records)
    writer.table("approximant", columns, rows)
    if args.gram:
        writer.json("gram.json", [{"n": r["n"], **r["gram"]}
                                  for r in result.records if "gram" in r])
    _finish(writer)
    return _report_failures(result)


def cmd_zeros(cfg: ExperimentConfig, args) -> int:
    result = _run_sweep(cfg, args, ("zeros",))
    writer = Writer(cfg.directory, cfg.formats)
    writer.table("zeros", ZERO_COLUMNS, zero_rows(result.records))
    for r in result.records:
        if "error" in r:
            continue
        writer.json(f"zeros/report_{r['n']:05d}.json",
                    {"n": r["n"], "trimmed": r["trimmed"], **r["equidistribution"]})
    _finish(writer)
    return _report_failures(result)


def cmd_equidist(cfg: ExperimentConfig, args) -> int:
    ns = None
    plan = None
    if cfg.subsequence is not None:
        plan = make_plan(cfg)
        ns = plan["indices"] if cfg.target.d1 else cfg.ns
        if not ns:
            print(f"plan is empty: {plan['advisory']}", file=sys.stderr)
            return EXIT_NUMERICAL
    result = _run_sweep(cfg, args, ("zeros",), ns=ns)
    writer = Writer(cfg.directory, cfg.formats)
    columns, rows = equidist_rows(result.records)
    writer.table("equidist", columns, rows)
    if plan is not None:
        writer.json("plan.json", plan)
    _finish(writer)
    return _report_failures(result)


def write_asymptotics(cfg: ExperimentConfig, records: list[dict], writer: Writer) -> None:
    writer.table("hn", HN_COLUMNS, hn_rows(records))
    if cfg.target.d1 >= 1:
        writer.table("gn", GN_COLUMNS, gn_rows(records))
    writer.table("adecay", ["n", "i", "re_z", "im_z", "normalized_A"],
                 adecay_rows(cfg, records))
    writer.table("detratio", ["n", "ratio"],
                 [[r["n"], r["det_ratio"]] for r in records if "error" not in r])
    writer.json("plan.json", make_plan(cfg))


def cmd_asymptotics(cfg: ExperimentConfig, args) -> int:
    result = _run_sweep(cfg, args, ("asymptotics",))
    writer = Writer(cfg.directory, cfg.formats)
    write_asymptotics(cfg, result.records, writer)
    _finish(writer)
    return _report_failures(result)


def summarize(record: dict) -> dict:
    """The compact per-n entry stored in run.json."""
    if "error" in record:
        return {"n": record["n"], "error": record["error"]}
    e = record["equidistribution"]
    h = record["H"]
    g = record.get("G", {})
    out = {
        "n": record["n"],
        "d0": record["d0"],
        "wiener": record["wiener"],
        "route_gap": record["route_gap"],
        "division_remainder": record["division_remainder"],
        "H": h.get("H"),
        "logH_over_n": h.get("logH_over_n"),
        "H_skipped": h.get("skipped", ""),
        "discrepancy": e["discrepancy"],
        "weyl_max": record["weyl_max"],
        "radial_max": e["radial_max"],
        "shell_fraction": e["shell_fraction"],
        "trimmed": record["trimmed"],
        "G_n": g.get("G_n"),
        "dn_ratio": g.get("ratio"),
        "det_ratio": record["det_ratio"],
        "a_decay": record["a_decay"],
    }
    if "advisories" in record:
        out["advisories"] = record["advisories"]
    return out


def run_verdicts(records: list[dict]) -> dict:
    good = [r for r in records if "error" not in r]
    gaps = [r["route_gap"] for r in good if r["route_gap"] is not None]
    d0 = [r["d0"] for r in good]
    monotone = all(b <= a * (1 + 1e-10) for a, b in zip(d0, d0[1:]))
    return {
        "route_equivalence": "PASS" if all(g <= 1e-8 for g in gaps) else "FAIL",
        "d0_nonincreasing": "PASS" if monotone else "FAIL",
        "det_ratio_positive": "PASS" if all((r["det_ratio"] or 0) > 0 for r in good) else "FAIL",
        "all_n_computed": "PASS" if len(good) == len(records) else "FAIL",
    }


def cmd_run(cfg: ExperimentConfig, args) -> int:
    result = _run_sweep(cfg, args, STAGES)
    records = result.records
    writer = Writer(cfg.directory, cfg.formats)
    verdicts = run_verdicts(records)
    report = {
        "config": cfg.to_dict(),
        "environment": _environment(cfg.bits),
        "records": [summarize(r) for r in records],
        "failures": result.failures,
        "aborted": result.aborted,
        "verdicts": verdicts,
    }
    writer.json("run.json", report)
    columns, rows = approximant_rows(cfg, records)
    writer.table("approximant", columns, rows)
    writer.table("zeros", ZERO_COLUMNS, zero_rows(records))
    columns, rows = equidist_rows(records)
    writer.table("equidist", columns, rows)
    write_asymptotics(cfg, records, writer)
    _finish(writer)
    code = _report_failures(result)
    if code == EXIT_OK and any(v == "FAIL" for v in verdicts.values()):
        code = EXIT_VERIFY
    return code


def parse_criteria(text: str | None) -> list[int] | None:
    if text is None:
        return None
    items = [t.strip() for t in text.split(",") if t.strip()]
    try:
        return [int(t) for t in items]
    except ValueError:
        raise ConfigError("--criteria", f"expected comma-separated integers, got {text!r}") from None


def cmd_verify(args) -> int:
    from .verification import CHECKS, run_suite

    selected = parse_criteria(args.criteria)
    if selected is not None:
        bad = [k for k in selected if k not in CHECKS]
        if bad:
            raise ConfigError("--criteria", f"unknown criteria {bad}; choose from 1..{len(CHECKS)}")
    bits = args.precision or 53
    with working_precision(bits):
        verdicts = run_suite(selected)
    print(f"verdicts: {len(verdicts)} criteria at {bits} bits")
    for v in verdicts:
        print(v.line())
    if args.out:
        writer = Writer(args.out, ("json",))
        writer.json("verify.json", [v.to_dict() for v in verdicts])
    return EXIT_VERIFY if any(not v.passed for v in verdicts) else EXIT_OK


COMMANDS = {
    "validate-weight": cmd_validate_weight,
    "approximant": cmd_approximant,
    "zeros": cmd_zeros,
    "equidist": cmd_equidist,
    "asymptotics": cmd_asymptotics,
    "run": cmd_run,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="opazeros",
        description="Optimal polynomial approximants, their zeros and asymptotic diagnostics.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
    common.add_argument("--format", choices=FORMATS, help="write only this table format")
    common.add_argument("--precision", type=int, choices=SUPPORTED_BITS, metavar="BITS",
                        help="significand bits: 53, 113 or 256 (overrides the config)")
    common.add_argument("--jobs", type=int, default=1, metavar="N",
                        help="worker processes for sweeps over n (default 1)")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "validate-weight": "admissibility diagnostics of the configured weight",
        "approximant": "d0, Wiener norm, |A| and route gap per n",
        "zeros": "zeros of 1 - p_n f with a report per n",
        "equidist": "discrepancy, Weyl moments and radial spread per n",
        "asymptotics": "H, G_n, A decay, det(E) ratio and subsequence plan",
        "run": "full pipeline with run.json",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, parents=[common], help=text)
        if name == "approximant":
            p.add_argument("--gram", action="store_true", help="also write Gram diagnostics")
    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--criteria", metavar="LIST",
                   help="comma-separated criterion numbers; empty string selects none")
    return parser


def _apply_overrides(cfg: ExperimentConfig, args) -> ExperimentConfig:
    changes = {}
    if args.out:
        changes["directory"] = args.out
    if args.format:
        changes["formats"] = (args.format,)
    if args.precision:
        changes["bits"] = args.precision
    return replace(cfg, **changes) if changes else cfg


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs", "must be >= 1")
        if args.command == "verify":
            return cmd_verify(args)
        if not args.config:
            raise ConfigError("--config", f"required for '{args.command}'")
        cfg = _apply_overrides(load_config(args.config), args)
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
