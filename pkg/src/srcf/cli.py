"""Command-line front end: benchmark dispatch, seeding, and CSV/JSON reports.

Commands
--------
integral-bench
    Relative-error study of the sum-of-powers integral (defaults: n=6,
    1000 runs, repetition counts sif3=50 / sif5=10 / qsif5=10, 600 MC
    samples).
filter-bench
    Growth-model filtering RMSE study (defaults: n=10, q=2, 500 Monte-Carlo
    runs, 100 steps).
rule-check
    Polynomial-exactness audit of one or more rules: evaluates every
    monomial up to one degree past the rule's order and reports the worst
    deviation per degree.

Flags override config-file values, which override the defaults above.  The
master seed comes from --seed, the config file, or the SRCF_SEED environment
variable, in that order.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from itertools import combinations_with_replacement

import numpy as np

from . import __version__
from .bench import (
    GrowthModel,
    IntegralBenchReport,
    RmseSeries,
    run_filter_bench,
    run_integral_bench,
)
from .rng import RngStream
from .rules import (
    IntegrationScheme,
    SchemeKind,
    draw_rule_batch,
    gaussian_monomial_moment,
)

__all__ = ["BenchConfig", "parse_config", "emit_report", "rule_check", "load_report", "main"]

_DEFAULT_NM = {"sif3": 50, "sif5": 10, "qsif5": 10}
_DEFAULT_MC_SAMPLES = 600

_COMMAND_DEFAULTS = {
    "integral-bench": {
        "n": 6,
        "q": 2,
        "steps": 100,
        "runs": 1000,
        "nmc": 500,
        "schemes": "ckf3,ckf5,sif3,sif5,qsif5,mc",
    },
    "filter-bench": {
        "n": 10,
        "q": 2,
        "steps": 100,
        "runs": 1000,
        "nmc": 500,
        "schemes": "ckf3,ckf5,sif3,sif5,qsif5",
    },
    "rule-check": {
        "n": 4,
        "q": 2,
        "steps": 100,
        "runs": 100,
        "nmc": 500,
        "schemes": "sif5",
    },
}

_FILE_KEYS = {
    "n": int,
    "q": int,
    "steps": int,
    "runs": int,
    "nmc": int,
    "schemes": str,
    "nm": str,
    "mc-samples": int,
    "seed": int,
    "out": str,
    "format": str,
    "workers": int,
}


@dataclass(frozen=True)
class BenchConfig:
    """Fully resolved invocation: everything needed to reproduce a report."""

    command: str
    n: int
    q: int
    steps: int
    runs: int
    n_mc: int
    schemes: tuple[IntegrationScheme, ...]
    nm: dict
    mc_samples: int
    seed: int
    out: str | None
    format: str
    workers: int


def _parse_nm_items(items) -> dict:
    nm = {}
    for item in items:
        for part in str(item).split(","):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise ValueError(f"--nm expects <scheme>=<int>, got {part!r}")
            label, _, value = part.partition("=")
            label = label.strip().lower()
            SchemeKind(label)  # validates the scheme name
            count = int(value)
            if count < 1:
                raise ValueError(f"--nm {label} must be >= 1, got {count}")
            nm[label] = count
    return nm


def _read_config_file(path: str) -> dict:
    values = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, value = line.partition(sep)
                    break
            else:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key = key.strip().lower()
            value = value.strip()
            if key not in _FILE_KEYS:
                raise ValueError(
                    f"{path}:{lineno}: unknown config key {key!r} "
                    f"(valid: {', '.join(sorted(_FILE_KEYS))})"
                )
            values[key] = _FILE_KEYS[key](value)
    return values


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srcf",
        description="Benchmarks for stochastic spherical-radial integration rules and filters.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for command in _COMMAND_DEFAULTS:
        p = sub.add_parser(command)
        p.add_argument("--n", type=int, default=None, help="state / integrand dimension")
        p.add_argument("--q", type=int, default=None, help="observation nonlinearity exponent")
        p.add_argument("--steps", type=int, default=None, help="trajectory length")
        p.add_argument("--runs", type=int, default=None,
                       help="independent runs (integral-bench) or rule draws (rule-check)")
        p.add_argument("--nmc", type=int, default=None, help="Monte-Carlo filter runs")
        p.add_argument("--schemes", type=str, default=None,
                       help="comma-separated subset of ckf3,ckf5,sif3,sif5,qsif5,mc")
        p.add_argument("--nm", action="append", default=None, metavar="SCHEME=INT",
                       help="repetition count per scheme, e.g. --nm sif5=10")
        p.add_argument("--mc-samples", type=int, default=None, help="samples per MC draw")
        p.add_argument("--seed", type=int, default=None, help="master seed (fallback: $SRCF_SEED)")
        p.add_argument("--out", type=str, default=None, help="output path (default: stdout)")
        p.add_argument("--format", type=str, default=None, choices=("csv", "json"))
        p.add_argument("--config", type=str, default=None, help="key-value file mirroring flags")
        p.add_argument("--workers", type=int, default=None, help="thread pool size")
    return parser


def parse_config(argv, config_file: str | None = None) -> BenchConfig:
    """Resolve argv (plus an optional config file) into a BenchConfig.

    Precedence: command-line flags, then config-file values, then the
    command's defaults.  Unknown flags and config keys are rejected.
    """
    args = _build_parser().parse_args(list(argv))
    command = args.command
    defaults = _COMMAND_DEFAULTS[command]

    path = args.config if args.config is not None else config_file
    file_vals = _read_config_file(path) if path else {}

    def pick(flag_value, file_key, fallback):
        if flag_value is not None:
            return flag_value
        if file_key in file_vals:
            return file_vals[file_key]
        return fallback

    n = pick(args.n, "n", defaults["n"])
    q = pick(args.q, "q", defaults["q"])
    steps = pick(args.steps, "steps", defaults["steps"])
    runs = pick(args.runs, "runs", defaults["runs"])
    n_mc = pick(args.nmc, "nmc", defaults["nmc"])
    schemes_str = pick(args.schemes, "schemes", defaults["schemes"])
    mc_samples = pick(args.mc_samples, "mc-samples", _DEFAULT_MC_SAMPLES)
    out = pick(args.out, "out", None)
    fmt = pick(args.format, "format", "csv")
    workers = pick(args.workers, "workers", 1)

    env_seed = os.environ.get("SRCF_SEED")
    seed = pick(args.seed, "seed", int(env_seed) if env_seed is not None else 0)

    for name, value, low in (
        ("--n", n, 1), ("--q", q, 1), ("--steps", steps, 1), ("--runs", runs, 1),
        ("--nmc", n_mc, 1), ("--mc-samples", mc_samples, 1), ("--workers", workers, 1),
    ):
        if value < low:
            raise ValueError(f"{name} must be >= {low}, got {value}")
    if fmt not in ("csv", "json"):
        raise ValueError(f"--format must be csv or json, got {fmt!r}")
    if seed < 0:
        raise ValueError(f"--seed must be non-negative, got {seed}")

    nm = dict(_DEFAULT_NM)
    if "nm" in file_vals:
        nm.update(_parse_nm_items([file_vals["nm"]]))
    if args.nm:
        nm.update(_parse_nm_items(args.nm))

    schemes = []
    for label in schemes_str.split(","):
        label = label.strip().lower()
        if not label:
            continue
        scheme = IntegrationScheme.from_label(
            label,
            n_m=nm.get(label, 1),
            mc_samples=mc_samples if label == "mc" else None,
        )
        schemes.append(scheme)
    if not schemes:
        raise ValueError("--schemes must name at least one scheme")

    return BenchConfig(
        command=command,
        n=n,
        q=q,
        steps=steps,
        runs=runs,
        n_mc=n_mc,
        schemes=tuple(schemes),
        nm={s.label: s.n_m for s in schemes},
        mc_samples=mc_samples,
        seed=seed,
        out=out,
        format=fmt,
        workers=workers,
    )


@dataclass(frozen=True)
class RuleCheckReport:
    """Max deviation from the analytic Gaussian moments per monomial degree."""

    rows: list[dict]
    meta: dict


def _monomial_exponents(n: int, degree: int):
    """All exponent vectors with the given total degree, in a fixed order."""
    if degree == 0:
        yield (0,) * n
        return
    for combo in combinations_with_replacement(range(n), degree):
        alpha = [0] * n
        for i in combo:
            alpha[i] += 1
        yield tuple(alpha)


def rule_check(n: int, scheme: IntegrationScheme, draws: int, rng: RngStream) -> RuleCheckReport:
    """Audit a rule's polynomial exactness degree on independent draws.

    Evaluates every monomial of total degree up to (rule degree + 1) on
    ``draws`` realizations of the point set.  For degrees within the rule's
    order the maximum absolute deviation from the analytic moment is
    reported; at one degree past it the report confirms that some monomial
    is inexact on every draw.
    """
    degree = scheme.kind.degree
    if degree is None:
        raise ValueError("rule-check needs a polynomial-exact rule; MC has no such degree")
    if draws < 1:
        raise ValueError("draws must be >= 1")
    if scheme.kind.deterministic:
        draws = 1
    points, weights = draw_rule_batch(scheme, n, draws, rng)
    max_exp = degree + 1
    # powers[d, p, i, e] = points[d, p, i] ** e
    powers = np.ones(points.shape + (max_exp + 1,))
    for e in range(1, max_exp + 1):
        powers[..., e] = powers[..., e - 1] * points

    rows = []
    inexact_floor = None
    for total in range(0, max_exp + 1):
        worst = 0.0
        per_draw_worst = np.zeros(draws)
        for alpha in _monomial_exponents(n, total):
            vals = np.ones(points.shape[:2])
            for i, a in enumerate(alpha):
                if a:
                    vals = vals * powers[..., i, a]
            est = np.einsum("dp,dp->d", weights, vals)
            dev = np.abs(est - gaussian_monomial_moment(alpha))
            worst = max(worst, float(dev.max()))
            np.maximum(per_draw_worst, dev, out=per_draw_worst)
        if total == max_exp:
            # the rule must fail some monomial here on every single draw
            inexact_floor = float(per_draw_worst.min())
        rows.append(
            {
                "scheme": scheme.label,
                "degree": total,
                "max_abs_deviation": worst,
            }
        )
    meta = {
        "command": "rule-check",
        "scheme": scheme.label,
        "n": n,
        "draws": draws,
        "rule_degree": degree,
        "max_deviation_within_degree": max(
            row["max_abs_deviation"] for row in rows if row["degree"] <= degree
        ),
        "degree_plus_one_inexact": bool(inexact_floor > 1e-6),
        "min_over_draws_worst_deviation_at_degree_plus_one": inexact_floor,
    }
    return RuleCheckReport(rows=rows, meta=meta)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def _round_floats(obj):
    if isinstance(obj, float):
        return float(f"{obj:.10g}")
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round_floats(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(f"{float(obj):.10g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _flatten_meta(meta: dict, prefix: str = "") -> list[tuple[str, str]]:
    items = []
    for key, value in meta.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten_meta(value, prefix=f"{name}."))
        else:
            items.append((name, _fmt(value)))
    return items


def _payload(report, config: BenchConfig) -> tuple[dict, list[str], list[dict]]:
    """Normalize a report into (meta, column order, row dicts)."""
    # worker count is deliberately absent: results are worker-independent
    # and output files must be byte-identical across pool sizes
    base_meta = {
        "tool_version": __version__,
        "command": config.command,
        "seed": config.seed,
        "format": config.format,
    }
    if isinstance(report, IntegralBenchReport):
        meta = {**base_meta, **report.meta}
        columns = ["scheme", "re_max_pct", "re_mean_pct", "n_m", "points"]
        rows = [
            {
                "scheme": r.scheme,
                "re_max_pct": r.re_max_pct,
                "re_mean_pct": r.re_mean_pct,
                "n_m": r.n_m,
                "points": r.points,
            }
            for r in report.rows
        ]
        return meta, columns, rows
    if isinstance(report, RuleCheckReport):
        meta = {**base_meta, **report.meta}
        return meta, ["scheme", "degree", "max_abs_deviation"], list(report.rows)
    if isinstance(report, list) and report and isinstance(report[0], RmseSeries):
        first = report[0].meta
        meta = {
            **base_meta,
            "q": first["q"],
            "n": first["n"],
            "n_mc": first["n_mc"],
            "steps": first["steps"],
            "trajectory_resamples": first["trajectory_resamples"],
            "schemes": {
                s.scheme: {
                    "n_m": s.meta["n_m"],
                    "points_per_integral": s.meta["points_per_integral"],
                    "excluded_runs": s.meta["excluded_runs"],
                    "variant": s.meta["variant"],
                }
                for s in report
            },
        }
        rows = [
            {"scheme": s.scheme, "k": k + 1, "rmse": float(v)}
            for s in report
            for k, v in enumerate(s.values)
        ]
        return meta, ["scheme", "k", "rmse"], rows
    raise TypeError(f"cannot serialize report of type {type(report).__name__}")


def emit_report(report, config: BenchConfig) -> list[str]:
    """Serialize a report to config.format, writing config.out or stdout.

    Returns the list of files written (empty when printing to stdout).
    Output is byte-for-byte reproducible from (config, seed, version).
    """
    meta, columns, rows = _payload(report, config)
    if config.format == "json":
        doc = {"meta": _round_floats(meta), "rows": _round_floats(rows)}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        lines = [f"# {key}: {value}" for key, value in _flatten_meta(meta)]
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(row[c]) for c in columns))
        text = "\n".join(lines) + "\n"
    if config.out is None:
        sys.stdout.write(text)
        return []
    with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return [config.out]


def load_report(path: str):
    """Parse a file written by emit_report back into (meta, rows)."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        doc = json.loads(text)
        return doc["meta"], doc["rows"]
    meta = {}
    rows = []
    header = None
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, value = line[2:].partition(": ")
            meta[key] = value
        elif header is None:
            header = line.split(",")
        else:
            rows.append(dict(zip(header, line.split(","))))
    return meta, rows


def _dispatch(config: BenchConfig) -> tuple[object, int]:
    rng = RngStream(config.seed)
    if config.command == "integral-bench":
        report = run_integral_bench(
            config.n, list(config.schemes), config.runs, rng, workers=config.workers
        )
        return report, 0
    if config.command == "filter-bench":
        model = GrowthModel(q=config.q, n=config.n)
        series = run_filter_bench(
            model, list(config.schemes), config.n_mc, config.steps, rng,
            workers=config.workers,
        )
        failed = any(s.meta["excluded_runs"] >= config.n_mc for s in series)
        return series, (1 if failed else 0)
    if config.command == "rule-check":
        rows = []
        meta = {}
        for scheme in config.schemes:
            rep = rule_check(config.n, scheme, config.runs, rng.substream(scheme.label))
            rows.extend(rep.rows)
            meta[scheme.label] = {k: v for k, v in rep.meta.items() if k != "command"}
        report = RuleCheckReport(rows=rows, meta={"command": "rule-check", "schemes": meta})
        return report, 0
    raise ValueError(f"unknown command {config.command!r}")


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except ValueError as err:
        print(f"srcf: error: {err}", file=sys.stderr)
        return 2
    try:
        report, status = _dispatch(config)
        emit_report(report, config)
    except OSError as err:
        print(f"srcf: i/o error: {err}", file=sys.stderr)
        return 1
    return status


if __name__ == "__main__":
    sys.exit(main())
