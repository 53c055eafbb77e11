"""The ``analyze`` command-line toolkit.

Subcommands::

    analyze report    --export FILE [--environment open|closed] [--reference CSV]
    analyze stats     --export FILE --role all|system|user [--environment ...]
    analyze simulate  --config FILE --seed N --out FILE
    analyze correlate --export FILE --columns A,B [--reference CSV] [--environment ...]

All subcommands accept ``--format json|table``.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ArenaError
from .models import Environment, dumps_canonical, read_export_file
from .reporting import (
    CORRELATION_COLUMNS,
    build_report,
    correlate_columns,
    filter_records,
    format_table,
    read_reference_csv,
)
from .simulate import simulate_battles
from .stats import ROLE_FILTERS, corpus_stats


def _env(value: str | None) -> Environment | None:
    return Environment(value) if value else None


def _emit(data: dict, fmt: str, table_text: str | None = None) -> None:
    if fmt == "json":
        print(json.dumps(data, indent=2, ensure_ascii=False))
    else:
        print(table_text if table_text is not None else _plain_table(data), end="")


def _plain_table(data: dict) -> str:
    width = max(len(k) for k in data) if data else 0
    return "".join(f"{k:<{width}}  {v}\n" for k, v in data.items())


def cmd_report(args: argparse.Namespace) -> int:
    records = filter_records(read_export_file(args.export), _env(args.environment))
    reference = read_reference_csv(args.reference) if args.reference else None
    report = build_report(records, reference)
    _emit(report, args.format, format_table(report))
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    records = filter_records(read_export_file(args.export), _env(args.environment))
    stats = corpus_stats(records, args.role)
    _emit(stats.to_dict(), args.format)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = json.load(fh)
    battles = simulate_battles(
        true_strengths={k: float(v) for k, v in config["strengths"].items()},
        n_battles=int(config.get("n_battles", 1000)),
        seed=args.seed,
        draw_probability=float(config.get("draw_probability", 0.0)),
    )
    with open(args.out, "w", encoding="utf-8") as fh:
        for crs_a, crs_b, outcome in battles:
            fh.write(
                dumps_canonical(
                    {"crs_a": crs_a, "crs_b": crs_b, "outcome": outcome.value}
                )
                + "\n"
            )
    print(f"wrote {len(battles)} battles to {args.out}")
    return 0


def cmd_correlate(args: argparse.Namespace) -> int:
    columns = tuple(c.strip() for c in args.columns.split(","))
    if len(columns) != 2:
        print(
            f"--columns takes two of {','.join(CORRELATION_COLUMNS)} separated by a comma",
            file=sys.stderr,
        )
        return 2
    records = filter_records(read_export_file(args.export), _env(args.environment))
    reference = read_reference_csv(args.reference) if args.reference else None
    result = correlate_columns(records, columns, reference)  # type: ignore[arg-type]
    _emit(result, args.format)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="analyze", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, export: bool = True) -> None:
        if export:
            p.add_argument("--export", required=True, help="JSONL export file")
            p.add_argument("--environment", choices=["open", "closed"])
        p.add_argument("--format", choices=["json", "table"], default="table")

    p_report = sub.add_parser("report", help="leaderboard, corpus stats, correlations")
    common(p_report)
    p_report.add_argument("--reference", help="CSV with header crs_id,value")
    p_report.set_defaults(func=cmd_report)

    p_stats = sub.add_parser("stats", help="corpus statistics")
    common(p_stats)
    p_stats.add_argument("--role", choices=list(ROLE_FILTERS), default="all")
    p_stats.set_defaults(func=cmd_stats)

    p_sim = sub.add_parser("simulate", help="generate a synthetic battle log")
    p_sim.add_argument("--config", required=True, help="JSON with strengths/n_battles")
    p_sim.add_argument("--seed", type=int, required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_corr = sub.add_parser("correlate", help="correlate two ranking columns")
    common(p_corr)
    p_corr.add_argument(
        "--columns", required=True, help="two of elo,satisfaction,reference"
    )
    p_corr.add_argument("--reference", help="CSV with header crs_id,value")
    p_corr.set_defaults(func=cmd_correlate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ArenaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
