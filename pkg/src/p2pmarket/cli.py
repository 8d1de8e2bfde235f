"""Command line: ``p2pmarket clear | compare | validate``.

Exit status: 0 success, 1 invalid input or I/O failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import io
from .mechanisms import Mechanism
from .runner import PERSPECTIVE_CHOICES, MarketConfig, compare_mechanisms, run_slot

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2


class _InputFailure(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="p2pmarket", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    mechanisms = [m.value for m in Mechanism]

    clear = sub.add_parser("clear", help="clear one slot and write trades.csv and report.json")
    clear.add_argument("--input", required=True, type=Path)
    clear.add_argument("--mechanism", choices=mechanisms)
    clear.add_argument("--perspective", choices=PERSPECTIVE_CHOICES)
    clear.add_argument("--config", type=Path)
    clear.add_argument("--slot", default="t")
    clear.add_argument("--output", required=True, type=Path)

    compare = sub.add_parser("compare", help="settle under every mechanism and tabulate totals")
    compare.add_argument("--input", required=True, type=Path)
    compare.add_argument("--config", type=Path)
    compare.add_argument("--format", choices=("csv", "json"), default="csv")
    compare.add_argument("--output", type=Path, default=Path("."))

    validate = sub.add_parser("validate", help="check an order file and print diagnostics")
    validate.add_argument("--input", required=True, type=Path)
    return parser


def _load_orders(path: Path):
    if not path.is_file():
        raise _InputFailure(f"cannot read {path}")
    parsed = io.read_orders(path)
    if not parsed.ok:
        for err in parsed.errors:
            print(f"error: {err}", file=sys.stderr)
        raise _InputFailure(f"{len(parsed.errors)} invalid record(s) in {path}")
    return parsed.orders


def _load_config(path: Path | None, perspective: str | None = None) -> MarketConfig:
    if path is None:
        config = MarketConfig()
    else:
        try:
            config = MarketConfig.load(path)
        except (OSError, ValueError) as exc:
            raise _InputFailure(f"bad config {path}: {exc}") from exc
    if perspective is not None:
        config = MarketConfig(
            config.fit, config.grid_price, config.block_map, config.default_mechanism, perspective
        )
    return config


def _cmd_clear(args: argparse.Namespace) -> int:
    orders = _load_orders(args.input)
    config = _load_config(args.config, args.perspective)
    result = run_slot(orders, config, args.mechanism, slot=args.slot)
    for note in result.warnings:
        print(f"warning: {note}", file=sys.stderr)
    for order_id in result.rejections:
        print(f"rejected: {order_id} (no block assignment)", file=sys.stderr)

    reports = [
        io.block_report(result.slot, b.block, b.settlement, b.indices) for b in result.blocks.values()
    ]
    if len(reports) == 1:
        report = reports[0]
    else:
        report = {
            "slot": result.slot,
            "mechanism": (args.mechanism or config.default_mechanism.value),
            "blocks": reports,
        }
    report["warnings"] = result.warnings
    report["rejections"] = result.rejections

    args.output.mkdir(parents=True, exist_ok=True)
    rows = [row for b in result.blocks.values() for row in io.trade_rows(b.settlement)]
    io.write_csv(args.output / "trades.csv", io.TRADE_COLUMNS, rows)
    io.write_json(args.output / "report.json", report)
    return EXIT_OK


def _cmd_compare(args: argparse.Namespace) -> int:
    orders = _load_orders(args.input)
    config = _load_config(args.config)
    rows = [
        {
            "mechanism": r.mechanism.value,
            "total_revenue": io.money(r.total_revenue),
            "total_saving": io.money(r.total_saving),
            "trc": io.money(r.trc),
            "budget_surplus": io.money(r.budget_surplus),
            "mti": io.fixed(r.mti, io.INDEX_PLACES),
        }
        for r in compare_mechanisms(orders, config)
    ]
    args.output.mkdir(parents=True, exist_ok=True)
    if args.format == "csv":
        io.write_csv(args.output / "comparison.csv", io.COMPARISON_COLUMNS, rows)
    else:
        io.write_json(args.output / "comparison.json", rows)
    return EXIT_OK


def _cmd_validate(args: argparse.Namespace) -> int:
    if not args.input.is_file():
        print(f"error: cannot read {args.input}", file=sys.stderr)
        return EXIT_INVALID
    parsed = io.read_orders(args.input)
    for err in parsed.errors:
        print(f"error: {err}")
    sellers = sum(1 for o in parsed.orders if o.side.value == "sell")
    print(f"{len(parsed.orders)} valid order(s) ({sellers} sell, {len(parsed.orders) - sellers} buy), "
          f"{len(parsed.errors)} error(s)")
    return EXIT_OK if parsed.ok else EXIT_INVALID


COMMANDS = {"clear": _cmd_clear, "compare": _cmd_compare, "validate": _cmd_validate}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except _InputFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
