"""Command-line harness: run adversaries, evaluate bounds, emit reports.

Subcommands
    adversary  run a registered algorithm against the adversarial probe and
               report certified (monotone) or statistical (convex) error
               lower bounds next to the closed-form bound
    bounds     tabulate query-count lower bounds over a dimension range
    gscan      scan the Chernoff factor over slice heights
    t0         compute the certified height threshold and accuracy cutoff
    quad       run baseline quadrature on built-in integrands
    verify     run the internal property suite

Reports are CSV ('.' decimal, LF endings, header row, deterministic row
order) or JSON; every run also writes a manifest with the full configuration,
seed, and library versions, which suffices to reproduce the output bytes.
Exit codes: 0 success, 2 configuration error, 3 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np
import scipy

from . import __version__, algorithms, convex, monotone, quadrature
from .core import DomainError, RandomStream, run_algorithm

__all__ = ["ConfigError", "ConsistencyError", "ExperimentConfig", "main", "run"]

OUT_DIR_ENV = "QUADVERSARY_OUT_DIR"


class ConfigError(ValueError):
    """Invalid experiment configuration (exit code 2)."""


class ConsistencyError(RuntimeError):
    """An internal consistency gate failed (exit code 3)."""


@dataclass(frozen=True)
class BoundRow:
    """One evaluated bound: dimension, accuracy, value, and provenance."""

    d: int
    eps: float
    bound: int
    formula_id: str
    provenance: str
    exceeds_budget: bool


@dataclass(frozen=True)
class BoundReport:
    """Evaluated bound formulas over a dimension range."""

    rows: tuple[BoundRow, ...]

    HEADER = ["d", "eps", "bound", "formula_id", "provenance", "exceeds_budget"]

    def to_rows(self) -> list[list]:
        return [
            [r.d, r.eps, r.bound, r.formula_id, r.provenance, r.exceeds_budget]
            for r in self.rows
        ]


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated parameters of one harness invocation."""

    command: str
    problem_class: str = "monotone"
    dim: int = 2
    budget: int = 0
    eps: float = 0.25
    seed: int = 0
    mc_samples: int = 10_000
    algorithm_id: str = "constant-half"

    def validate(self) -> None:
        if self.problem_class not in ("monotone", "convex"):
            raise ConfigError(f"unknown class {self.problem_class!r}")
        if self.dim < 1:
            raise ConfigError("d must be at least 1")
        if self.budget < 0:
            raise ConfigError("budget must be nonnegative")
        if not (0.0 < self.eps < 0.5):
            raise ConfigError("eps must lie in (0, 1/2)")
        if self.mc_samples < 1:
            raise ConfigError("mc-samples must be at least 1")
        if not (0 <= self.seed < 2**64):
            raise ConfigError("seed must be a 64-bit nonnegative integer")


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _resolve_out(out: str | None, default_name: str) -> Path:
    if out:
        return Path(out)
    return Path(os.environ.get(OUT_DIR_ENV, ".")) / default_name


def _write_report(path: Path, header: list[str], rows: list[list], fmt: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_format_cell(v) for v in row])
    else:
        obj = [dict(zip(header, row)) for row in rows]
        _write_json(path, obj)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(path: Path, command: str, config: dict) -> None:
    manifest = {
        "command": command,
        "config": config,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "quadversary": __version__,
        },
    }
    _write_json(path.parent / (path.stem + ".manifest.json"), manifest)


def _convex_theorem_bound(n: int, dim: int, t0: float) -> float:
    """Error floor implied by the closed-form hull-volume cap."""
    return max(0.0, 0.5 * (1.0 - convex.hull_volume_upper_bound(n, dim, t0)))


def cmd_adversary(args) -> int:
    config = ExperimentConfig(
        command="adversary",
        problem_class=args.problem_class,
        dim=args.d,
        budget=args.budget,
        eps=args.eps,
        seed=args.seed,
        mc_samples=args.mc_samples,
        algorithm_id=args.algorithm,
    )
    config.validate()
    if config.algorithm_id not in algorithms.ALGORITHM_IDS:
        raise ConfigError(f"unknown algorithm {config.algorithm_id!r}")
    stream = RandomStream(config.seed)
    alg = algorithms.make_algorithm(
        config.algorithm_id, config.dim, config.budget, stream.substream("algorithm")
    )

    if config.problem_class == "monotone":
        oracle = algorithms.make_oracle("threshold", config.dim)
        transcript, _ = run_algorithm(alg, oracle, config.budget)
        pair = monotone.build_fooling_pair(
            transcript.points_array() if transcript.n else [],
            config.dim,
            stream=stream.substream("gap-volume"),
        )
        certified = pair.exact_gap / 2.0
        theorem = monotone.error_lower_bound(pair.n, config.dim)
        if pair.volumes_exact and certified < theorem - 1e-12:
            raise ConsistencyError(
                f"certified bound {certified} fell below the closed form {theorem}"
            )
        out = _resolve_out(args.out, f"adversary.{args.format}")
        if args.format == "json":
            obj = pair.to_json_obj()
            obj["error_lower_bound"] = certified
            obj["theorem_lower_bound"] = theorem
            _write_json(out, obj)
        else:
            header = ["d", "n", "ell", "exact_gap", "guaranteed_gap", "error_lower_bound"]
            rows = [[config.dim, pair.n, pair.ell, pair.exact_gap, pair.guaranteed_gap, certified]]
            _write_report(out, header, rows, "csv")
        _write_manifest(out, "adversary", asdict(config))
        print(f"adversary monotone d={config.dim} n={pair.n} certified>={certified!r} -> {out}")
        return 0

    oracle = algorithms.zero_oracle(config.dim)
    transcript, _ = run_algorithm(alg, oracle, config.budget)
    samples = convex.SampleSet.from_points(transcript.points(), config.dim)
    estimate = convex.empirical_error_lower_bound(
        samples, config.mc_samples, stream.substream("hull-mc")
    )
    threshold = convex.default_height_threshold()
    theorem = _convex_theorem_bound(samples.n, config.dim, threshold.t0)
    out = _resolve_out(args.out, f"adversary.{args.format}")
    header = [
        "d",
        "n",
        "error_lower_bound_stat",
        "std_error",
        "ci_low",
        "ci_high",
        "error_lower_bound_theorem",
    ]
    rows = [[
        config.dim,
        samples.n,
        estimate.value,
        estimate.std_error,
        estimate.value - 3.0 * estimate.std_error,
        estimate.value + 3.0 * estimate.std_error,
        theorem,
    ]]
    _write_report(out, header, rows, args.format)
    _write_manifest(out, "adversary", {**asdict(config), "t0": threshold.t0})
    print(f"adversary convex d={config.dim} n={samples.n} stat>={estimate.value!r} -> {out}")
    return 0


def cmd_bounds(args) -> int:
    if not (0.0 < args.eps < 0.5):
        raise ConfigError("eps must lie in (0, 1/2)")
    if args.dmax < args.d or args.d < 1:
        raise ConfigError("need 1 <= d <= dmax")
    budget = args.budget
    rows = []
    extra: dict = {}
    if args.problem_class == "monotone":
        formula = "monotone-complexity-lower"
        bound_for = lambda d: monotone.complexity_lower_bound(args.eps, d)
    else:
        threshold = convex.default_height_threshold()
        extra["t0"] = threshold.t0
        extra["eps0"] = threshold.eps0
        formula = "convex-complexity-lower"
        bound_for = lambda d: convex.complexity_lower_bound(args.eps, d, threshold.eps0)
    for d in range(args.d, args.dmax + 1):
        bound = bound_for(d)
        rows.append(BoundRow(d, args.eps, bound, formula, "certified-closed-form", bound > budget))
    report = BoundReport(tuple(rows))
    out = _resolve_out(args.out, "bounds." + args.format)
    _write_report(out, BoundReport.HEADER, report.to_rows(), args.format)
    _write_manifest(out, "bounds", {
        "class": args.problem_class, "eps": args.eps, "d": args.d,
        "dmax": args.dmax, "budget": budget, **extra,
    })
    print(f"bounds {args.problem_class} eps={args.eps} d={args.d}..{args.dmax} -> {out}")
    return 0


def cmd_gscan(args) -> int:
    if args.tmin < 0.0 or args.tmax > 1.0 or args.tmin > args.tmax:
        raise ConfigError("need 0 <= tmin <= tmax <= 1")
    if args.tstep <= 0.0:
        raise ConfigError("tstep must be positive")
    rows = []
    t = args.tmin
    while t <= args.tmax + 1e-12:
        bound = convex.chernoff_factor_min((1.0 + t) / 4.0)
        rows.append([
            t,
            bound.s,
            bound.alpha_star,
            bound.g_min,
            convex.CERTIFICATION_LIMIT - bound.g_min,
        ])
        t = round(t + args.tstep, 12)
    out = _resolve_out(args.out, "gscan." + args.format)
    header = ["t", "s", "alpha_star", "g_min", "bound_10_over_11_margin"]
    _write_report(out, header, rows, args.format)
    _write_manifest(out, "gscan", {"tmin": args.tmin, "tmax": args.tmax, "tstep": args.tstep})
    print(f"gscan {len(rows)} heights -> {out}")
    return 0


def cmd_t0(args) -> int:
    threshold = convex.default_height_threshold()
    out = _resolve_out(args.out, "t0.json")
    _write_json(out, threshold.to_json_obj())
    _write_manifest(out, "t0", {})
    print(f"t0={threshold.t0!r} eps0={threshold.eps0!r} -> {out}")
    return 0


def _rate_rows(dim: int, oracle_id: str) -> tuple[list[list], float]:
    rows = []
    logs = []
    for m in (2, 4, 8, 16, 32):
        oracle = algorithms.make_oracle(oracle_id, dim)
        bracket = quadrature.staircase_monotone(oracle, m)
        n = bracket.samples_used
        rows.append([
            dim, "staircase", n, bracket.estimate, bracket.certified_error,
            algorithms.true_integral(oracle_id, dim),
        ])
        logs.append((np.log(n), np.log(bracket.certified_error)))
    xs, ys = zip(*logs)
    slope = float(np.polyfit(xs, ys, 1)[0])
    return rows, slope


def cmd_quad(args) -> int:
    config = ExperimentConfig(
        command="quad",
        dim=args.d,
        seed=args.seed,
        mc_samples=args.mc_samples,
        budget=max(args.n, 0),
    )
    config.validate()
    if args.oracle not in algorithms.ORACLE_IDS:
        raise ConfigError(f"unknown oracle {args.oracle!r}")
    rows = []
    if args.method in ("staircase", "both"):
        oracle = algorithms.make_oracle(args.oracle, config.dim)
        bracket = quadrature.staircase_monotone(oracle, args.m, RandomStream(config.seed))
        rows.append([
            config.dim, "staircase", bracket.samples_used, bracket.estimate,
            bracket.certified_error, algorithms.true_integral(args.oracle, config.dim),
        ])
    if args.method in ("mc", "both"):
        if args.n < 1:
            raise ConfigError("mc needs --n >= 1")
        oracle = algorithms.make_oracle(args.oracle, config.dim)
        estimate, rmse = quadrature.monte_carlo(oracle, args.n, RandomStream(config.seed))
        rows.append([
            config.dim, "mc", args.n, estimate, rmse,
            algorithms.true_integral(args.oracle, config.dim),
        ])
    if args.method == "rate":
        rate_rows, slope = _rate_rows(config.dim, args.oracle)
        rows.extend(rate_rows)
        rows.append([config.dim, "rate-slope", sum(r[2] for r in rate_rows), slope, "", ""])
    if not rows:
        raise ConfigError(f"unknown method {args.method!r}")
    out = _resolve_out(args.out, "quad." + args.format)
    header = ["d", "method", "n", "estimate", "certified_error_or_rmse", "true_value_if_known"]
    _write_report(out, header, rows, args.format)
    _write_manifest(out, "quad", {
        **asdict(config), "method": args.method, "oracle": args.oracle,
        "m": args.m, "n": args.n,
    })
    print(f"quad {args.method} oracle={args.oracle} d={config.dim} -> {out}")
    return 0


def cmd_verify(args) -> int:
    from . import selfcheck

    results = selfcheck.run_all(seed=args.seed)
    failures = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        failures += 0 if ok else 1
    print(f"{len(results) - failures}/{len(results)} checks passed")
    if failures:
        raise ConsistencyError(f"{failures} verification checks failed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quadversary",
        description="Adversarial error certificates and baseline quadrature on the unit cube",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("adversary", help="run an algorithm against the adversarial probe")
    p.add_argument("--class", dest="problem_class", choices=("monotone", "convex"), required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--budget", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--mc-samples", type=int, default=10_000)
    p.add_argument("--algorithm", type=str, default="constant-half",
                   help=f"one of {', '.join(algorithms.ALGORITHM_IDS)}")
    add_common(p)
    p.set_defaults(fn=cmd_adversary)

    p = sub.add_parser("bounds", help="tabulate query-count lower bounds")
    p.add_argument("--class", dest="problem_class", choices=("monotone", "convex"), required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--dmax", type=int, required=True)
    p.add_argument("--budget", type=int, default=10**6,
                   help="query budget against which bounds are flagged")
    add_common(p)
    p.set_defaults(fn=cmd_bounds)

    p = sub.add_parser("gscan", help="scan the Chernoff factor over slice heights")
    p.add_argument("--tmin", type=float, default=0.0)
    p.add_argument("--tmax", type=float, default=0.4)
    p.add_argument("--tstep", type=float, default=0.02)
    add_common(p)
    p.set_defaults(fn=cmd_gscan)

    p = sub.add_parser("t0", help="compute the certified height threshold")
    add_common(p)
    p.set_defaults(fn=cmd_t0)

    p = sub.add_parser("quad", help="baseline quadrature on built-in integrands")
    p.add_argument("--method", choices=("staircase", "mc", "both", "rate"), default="staircase")
    p.add_argument("--oracle", type=str, default="threshold",
                   help=f"one of {', '.join(algorithms.ORACLE_IDS)}")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--m", type=int, default=4, help="staircase cells per axis")
    p.add_argument("--n", type=int, default=0, help="Monte Carlo sample count")
    p.add_argument("--mc-samples", type=int, default=10_000)
    add_common(p)
    p.set_defaults(fn=cmd_quad)

    p = sub.add_parser("verify", help="run the internal property suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConsistencyError as exc:
        print(f"consistency failure: {exc}", file=sys.stderr)
        return 3


def run() -> None:
    sys.exit(main())
