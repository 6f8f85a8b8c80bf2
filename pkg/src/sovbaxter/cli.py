"""Command-line interface: ``verify``/``run``, ``sweep``, ``regimes`` and ``report``.

Exit codes: 0 when every enabled check passes, 1 when any check fails,
2 on configuration errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import DEFAULT_MAX_N, RunConfig, encode, materialize
from .errors import ConfigError
from .runner import aggregate, dumps, render_csv, render_markdown, run, summary_row, sweep
from .sov import classify_boundary
from .symmetry import select_variant
from .xxx import XXXBoundary

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parse_overrides(items: list[str] | None) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--tol-override expects KEY=VAL, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--tol-override {key}: {value!r} is not a number") from exc
    return out


def _load_config(args) -> RunConfig:
    data = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    if args.seed is not None:
        data["seed"] = args.seed
    overrides = _parse_overrides(args.tol_override)
    if overrides:
        data["tolerances"] = {**data.get("tolerances", {}), **overrides}
    return RunConfig.from_dict(data, args.max_n)


def _append(path: str | None, lines: list[str]) -> None:
    if path is None:
        return
    with open(path, "a") as fh:
        for line in lines:
            fh.write(line + "\n")


def _csv_path(out: str | None) -> str | None:
    return None if out is None else str(Path(out).with_suffix(".csv"))


def cmd_verify(args) -> int:
    cfg = _load_config(args)
    report = run(cfg)
    rec = report.record()
    _append(args.out, [dumps(rec)])
    csv_path = _csv_path(args.out)
    if csv_path:
        new = not Path(csv_path).exists()
        text = render_csv([rec])
        with open(csv_path, "a") as fh:
            fh.write(text if new else text.split("\n", 1)[1])
    for name, chk in rec["checks"].items():
        print(f"{name:18s} {chk['status']:4s} {chk['diagnostic']}")
    row = summary_row(rec)
    print(f"regime={row['regime']} eigenvalues={row['eigenvalue_count']} passed={row['passed']}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    if args.samples < 0:
        raise ConfigError("--samples must be non-negative")
    if args.out:
        with open(args.out, "a") as sink:
            summary = sweep(cfg, args.samples, args.workers, sink)
    else:
        summary = sweep(cfg, args.samples, args.workers)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK if summary["passed"] == summary["samples"] else EXIT_FAIL


def cmd_regimes(args) -> int:
    cfg = _load_config(args)
    problem = materialize(cfg)
    if isinstance(problem.boundary, XXXBoundary):
        b = problem.boundary
        out = {"model": "xxx", "xi_b_zero": b.xi_b == 0, "sqrt_sign": b.sqrt_sign}
    else:
        cls = classify_boundary(problem.boundary, cfg.N, problem.chain.eta, cfg.tol.gen)
        eps = select_variant(problem.boundary, cfg.N, problem.chain.eta, cfg.tol.gen)
        out = {"model": "xxz", "regime": problem.regime, **cls.to_json(),
               "variant": None if eps is None else eps.label()}
    out["boundary"] = encode(problem.boundary.__dict__)
    print(json.dumps(encode(out), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        lines = Path(args.input).read_text().splitlines()
        records = [json.loads(line) for line in lines if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read {args.input}: {exc}") from exc
    if args.format == "csv":
        text = render_csv(records)
    elif args.format == "md":
        text = render_markdown(records)
    else:
        text = json.dumps(aggregate(records), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sovbaxter", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (schema 1)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")
    common.add_argument("--out", default=None, help="JSONL output (a CSV summary is written alongside)")
    common.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
    common.add_argument("--tol-override", action="append", metavar="KEY=VAL", help="override one tolerance (repeatable)")
    common.add_argument("--max-n", type=int, default=DEFAULT_MAX_N, help="largest accepted chain length")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("verify", "run"):
        p = sub.add_parser(name, parents=[common], help="run the checks for one configuration")
        p.set_defaults(func=cmd_verify)
    p = sub.add_parser("sweep", parents=[common], help="run seeded copies of a configuration")
    p.add_argument("--samples", type=int, default=10, help="number of seeds, starting at --seed")
    p.set_defaults(func=cmd_sweep)
    p = sub.add_parser("regimes", parents=[common], help="classify the boundary point of a configuration")
    p.set_defaults(func=cmd_regimes)
    p = sub.add_parser("report", help="render CSV, Markdown or an aggregate from a JSONL file")
    p.add_argument("input", help="JSONL file written by verify or sweep")
    p.add_argument("--format", choices=("csv", "md", "json"), default="csv", help="output format")
    p.add_argument("--out", default=None, help="write to this file instead of stdout")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
