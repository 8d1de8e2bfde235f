"""One clearing slot end to end: blocks, pipeline per block, mechanism comparison."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, Mapping

from .clearing import Determination, Perspective, TradeLedger, allocate, determine
from .mechanisms import Mechanism, Settlement, settle
from .metrics import MarketIndices, market_indices, pooled_mti
from .orderbook import Offer, Order, OrderBook, build_book, parse_price, split_orders

logger = logging.getLogger(__name__)

DEFAULT_BLOCK = "default"
PERSPECTIVE_CHOICES = ("auto", "buyer", "seller")


@dataclass(frozen=True)
class MarketConfig:
    fit: Decimal | None = None
    grid_price: Decimal | None = None
    block_map: Mapping[str, str] | None = None
    default_mechanism: Mechanism = Mechanism.PROPOSED
    perspective_override: str = "auto"

    def __post_init__(self) -> None:
        if self.fit is not None and self.grid_price is not None and self.fit > self.grid_price:
            raise ValueError(f"fit {self.fit} exceeds grid_price {self.grid_price}")
        if self.perspective_override not in PERSPECTIVE_CHOICES:
            raise ValueError(f"perspective_override must be one of {PERSPECTIVE_CHOICES}")

    @property
    def perspective(self) -> Perspective | None:
        if self.perspective_override == "auto":
            return None
        return Perspective(self.perspective_override)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "MarketConfig":
        unknown = set(data) - {"fit", "grid_price", "block_map", "default_mechanism", "perspective_override"}
        if unknown:
            raise ValueError(f"unknown config key(s): {', '.join(sorted(unknown))}")
        fit = data.get("fit")
        grid = data.get("grid_price")
        block_map = data.get("block_map")
        if block_map is not None:
            block_map = {str(k): str(v) for k, v in block_map.items()}
        return cls(
            fit=None if fit is None else parse_price(fit),
            grid_price=None if grid is None else parse_price(grid),
            block_map=block_map,
            default_mechanism=Mechanism.parse(data.get("default_mechanism", "proposed")),
            perspective_override=data.get("perspective_override", "auto"),
        )

    @classmethod
    def load(cls, path: str | Path) -> "MarketConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class BlockResult:
    block: str
    book: OrderBook
    determination: Determination
    ledger: TradeLedger
    settlement: Settlement
    indices: MarketIndices


@dataclass
class SlotResult:
    slot: str
    blocks: dict[str, BlockResult] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    rejections: list[str] = field(default_factory=list)

    @property
    def traded_energy(self) -> int:
        return sum(b.settlement.ledger.traded_energy for b in self.blocks.values())


def partition_blocks(
    orders: Iterable[Order], config: MarketConfig
) -> tuple[dict[str, list[Order]], list[str]]:
    """Route orders to blocks; returns ``(blocks, rejected ids)``.

    Without a block map everything lands in one default block.
    """
    blocks: dict[str, list[Order]] = {}
    rejected: list[str] = []
    for order in orders:
        if config.block_map is None:
            block = DEFAULT_BLOCK
        elif order.id in config.block_map:
            block = config.block_map[order.id]
        else:
            rejected.append(order.id)
            continue
        blocks.setdefault(block, []).append(order)
    return dict(sorted(blocks.items())), rejected


def rationality_warnings(orders: Iterable[Order], config: MarketConfig) -> list[str]:
    notes = []
    for order in orders:
        if isinstance(order, Offer):
            if config.fit is not None and order.price < config.fit:
                notes.append(f"offer {order.id}: price {order.price} below feed-in tariff {config.fit}")
        elif config.grid_price is not None and order.price > config.grid_price:
            notes.append(f"bid {order.id}: price {order.price} above grid price {config.grid_price}")
    return notes


def clear_book(
    book: OrderBook, mechanism: Mechanism, perspective: Perspective | None = None, block: str = DEFAULT_BLOCK
) -> BlockResult:
    determination = determine(book)
    ledger = allocate(book, determination, perspective)
    settlement = settle(book, determination, ledger, mechanism, perspective)
    return BlockResult(block, book, determination, ledger, settlement, market_indices(settlement))


def _books(orders: Iterable[Order], config: MarketConfig, result: SlotResult) -> dict[str, OrderBook]:
    orders = list(orders)
    result.warnings.extend(rationality_warnings(orders, config))
    blocks, result.rejections = partition_blocks(orders, config)
    for order_id in result.rejections:
        logger.warning("order %s has no block assignment; rejected", order_id)
    return {name: build_book(*split_orders(members)) for name, members in blocks.items()}


def run_slot(
    orders: Iterable[Order],
    config: MarketConfig | None = None,
    mechanism: Mechanism | str | None = None,
    slot: str = "t",
) -> SlotResult:
    config = config or MarketConfig()
    mechanism = Mechanism.parse(mechanism) if mechanism is not None else config.default_mechanism
    result = SlotResult(slot)
    for name, book in _books(orders, config, result).items():
        result.blocks[name] = clear_book(book, mechanism, config.perspective, name)
    return result


@dataclass(frozen=True)
class ComparisonRow:
    mechanism: Mechanism
    total_revenue: Fraction
    total_saving: Fraction
    trc: Fraction
    budget_surplus: Fraction
    mti: Fraction | None


def compare_mechanisms(orders: Iterable[Order], config: MarketConfig | None = None) -> list[ComparisonRow]:
    """Settle the same slot under every mechanism; totals are summed over blocks.

    Non-reducing mechanisms share one ledger per block.
    """
    config = config or MarketConfig()
    scratch = SlotResult("compare")
    books = _books(orders, config, scratch)
    shared = {}
    for name, book in books.items():
        determination = determine(book)
        shared[name] = (book, determination, allocate(book, determination, config.perspective))

    rows = []
    for mechanism in Mechanism:
        settlements = [
            settle(book, det, ledger, mechanism, config.perspective) for book, det, ledger in shared.values()
        ]
        zero = Fraction(0)
        rows.append(
            ComparisonRow(
                mechanism=mechanism,
                total_revenue=sum((s.total_revenue for s in settlements), zero),
                total_saving=sum((s.total_saving for s in settlements), zero),
                trc=sum((s.trc for s in settlements), zero),
                budget_surplus=sum((s.auctioneer_surplus for s in settlements), zero),
                mti=pooled_mti(settlements),
            )
        )
    return rows
