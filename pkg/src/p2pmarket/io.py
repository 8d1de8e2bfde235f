"""Order files in, trades / reports / comparisons out.

Every decimal written by this module is a string with a fixed number of
places, so files are exact and byte-stable across runs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Sequence

from .mechanisms import Settlement
from .metrics import MarketIndices
from .orderbook import Order, OrderError, validate_order

ORDER_COLUMNS = ["id", "side", "energy_wh", "price", "participation"]
TRADE_COLUMNS = ["seller_id", "buyer_id", "energy_wh", "seller_price", "buyer_price"]
COMPARISON_COLUMNS = ["mechanism", "total_revenue", "total_saving", "trc", "budget_surplus", "mti"]

MONEY_PLACES = 4
PRICE_PLACES = 2
INDEX_PLACES = 4


def fixed(value: Fraction | int | None, places: int) -> str | None:
    """Render an exact value rounded half-to-even to ``places`` decimals."""
    if value is None:
        return None
    scaled = round(Fraction(value) * 10**places)
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(places + 1, "0")
    return f"{sign}{digits[:-places]}.{digits[-places:]}" if places else f"{sign}{digits}"


def money(value: Fraction | None) -> str | None:
    return fixed(value, MONEY_PLACES)


def price(value: Fraction | None) -> str | None:
    return fixed(value, PRICE_PLACES)


@dataclass
class OrderFile:
    orders: list[Order] = field(default_factory=list)
    errors: list[OrderError] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors


def _records(path: Path) -> list[tuple[str, dict[str, Any]]]:
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        if not isinstance(data, list):
            raise OrderError("order JSON must be an array of objects", str(path))
        out = []
        for n, item in enumerate(data):
            if not isinstance(item, dict):
                raise OrderError("order record must be an object", f"record {n + 1}")
            out.append((f"record {n + 1}", item))
        return out
    reader = csv.DictReader(text.splitlines())
    missing = {"id", "side", "energy_wh", "price"} - set(reader.fieldnames or [])
    if missing:
        raise OrderError(f"missing CSV column(s): {', '.join(sorted(missing))}", str(path))
    # header is line 1
    return [(f"line {n + 2}", row) for n, row in enumerate(reader)]


def parse_records(records: Iterable[tuple[str, dict[str, Any]]]) -> OrderFile:
    """Validate records independently, collecting every failure with its location."""
    result = OrderFile()
    seen: dict[tuple[str, str], str] = {}
    for sequence, (location, record) in enumerate(records):
        try:
            order = validate_order(record, sequence)
        except OrderError as exc:
            result.errors.append(OrderError(exc.reason, location))
            continue
        key = (order.side.value, order.id)
        if key in seen:
            result.errors.append(
                OrderError(f"duplicate {order.side.value} id {order.id!r} (first at {seen[key]})", location)
            )
            continue
        seen[key] = location
        result.orders.append(order)
    return result


def read_orders(path: str | Path) -> OrderFile:
    """Read an order CSV or JSON file (chosen by suffix)."""
    path = Path(path)
    try:
        records = _records(path)
    except OrderError as exc:
        return OrderFile(errors=[exc])
    except (csv.Error, json.JSONDecodeError, UnicodeDecodeError) as exc:
        return OrderFile(errors=[OrderError(f"unreadable order file: {exc}", str(path))])
    return parse_records(records)


def order_row(order: Order) -> dict[str, str]:
    return {
        "id": order.id,
        "side": order.side.value,
        "energy_wh": str(order.quantity),
        "price": str(order.price),
        "participation": order.participation.value,
    }


def write_orders(orders: Sequence[Order], path: str | Path) -> None:
    path = Path(path)
    rows = [order_row(o) for o in sorted(orders, key=lambda o: o.sequence)]
    if path.suffix.lower() == ".json":
        path.write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")
        return
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=ORDER_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def trade_rows(settlement: Settlement) -> list[dict[str, str]]:
    return [
        {
            "seller_id": p.seller_id,
            "buyer_id": p.buyer_id,
            "energy_wh": str(p.energy_wh),
            "seller_price": price(p.seller_price),
            "buyer_price": price(p.buyer_price),
        }
        for p in settlement.priced_trades
    ]


def write_csv(path: str | Path, columns: Sequence[str], rows: Iterable[dict[str, Any]]) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: "" if v is None else v for k, v in row.items()})


def write_json(path: str | Path, payload: Any) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def indices_json(indices: MarketIndices) -> dict[str, Any]:
    return {
        "trc": money(indices.trc),
        "total_revenue": money(indices.total_revenue),
        "total_saving": money(indices.total_saving),
        "budget_surplus": money(indices.budget_surplus),
        "mti": fixed(indices.mti, INDEX_PLACES),
        "ssi": {k: fixed(v, INDEX_PLACES) for k, v in indices.ssi.items()},
        "bsi": {k: fixed(v, INDEX_PLACES) for k, v in indices.bsi.items()},
    }


def block_report(
    slot: str, block: str, settlement: Settlement, indices: MarketIndices
) -> dict[str, Any]:
    det = settlement.determination
    ledger = settlement.ledger
    return {
        "slot": slot,
        "block": block,
        "mechanism": settlement.mechanism.value,
        "determination": {
            "L": det.n_sellers,
            "K": det.n_buyers,
            "r_L": price(None if det.boundary_seller_price is None else Fraction(det.boundary_seller_price)),
            "b_K": price(None if det.boundary_buyer_price is None else Fraction(det.boundary_buyer_price)),
        },
        "perspective": ledger.perspective.value,
        "trades": [{**row, "energy_wh": int(row["energy_wh"])} for row in trade_rows(settlement)],
        "totals": {
            "revenue": money(settlement.total_revenue),
            "saving": money(settlement.total_saving),
            "trc": money(settlement.trc),
            "surplus": money(settlement.auctioneer_surplus),
        },
        "revenue": {k: money(v) for k, v in settlement.revenue_per_seller.items()},
        "cost_saving": {k: money(v) for k, v in settlement.saving_per_buyer.items()},
        "indices": indices_json(indices),
        "unsold": ledger.unsold,
        "unserved": ledger.unserved,
    }

