"""Offers, bids and the canonical order book.

Prices are kept as :class:`~decimal.Decimal` exactly as submitted so they
round-trip through text; every downstream computation converts them to
:class:`~fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Mapping


class OrderError(ValueError):
    """An order record failed validation."""

    def __init__(self, message: str, location: str | None = None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.reason = message
        self.location = location


class Side(Enum):
    SELL = "sell"
    BUY = "buy"


class Participation(Enum):
    FRACTIONAL = "fractional"
    NONFRACTIONAL = "nonfractional"

    @classmethod
    def parse(cls, value: Any) -> "Participation":
        if value is None or value == "":
            return cls.FRACTIONAL
        if isinstance(value, Participation):
            return value
        text = str(value).strip().lower().replace("-", "").replace("_", "")
        for member in cls:
            if member.value == text:
                return member
        raise OrderError(f"unknown participation mode {value!r}")


@dataclass(frozen=True)
class Order:
    id: str
    quantity: int  # Wh
    price: Decimal  # currency per kWh
    participation: Participation = Participation.FRACTIONAL
    sequence: int = 0

    side = Side.SELL  # overridden per subclass

    def __post_init__(self) -> None:
        if isinstance(self.quantity, bool) or not isinstance(self.quantity, int):
            raise OrderError(f"quantity must be an integer number of Wh, got {self.quantity!r}")
        if self.quantity <= 0:
            raise OrderError(f"non-positive quantity {self.quantity}")
        if not isinstance(self.price, Decimal) or not self.price.is_finite():
            raise OrderError(f"malformed price {self.price!r}")
        if self.price < 0:
            raise OrderError(f"negative price {self.price}")

    @property
    def exact_price(self) -> Fraction:
        return Fraction(self.price)

    @property
    def is_fractional(self) -> bool:
        return self.participation is Participation.FRACTIONAL


@dataclass(frozen=True)
class Offer(Order):
    """Sell order: ``quantity`` Wh offered at reservation ``price``."""

    side = Side.SELL


@dataclass(frozen=True)
class Bid(Order):
    """Buy order: ``quantity`` Wh demanded at bid ``price``."""

    side = Side.BUY


def parse_price(value: Any) -> Decimal:
    """Parse a decimal price without passing through binary floating point."""
    if isinstance(value, bool):
        raise OrderError(f"malformed price {value!r}")
    if isinstance(value, float):
        # shortest repr recovers the literal written in a JSON file
        value = repr(value)
    try:
        price = Decimal(str(value).strip())
    except (InvalidOperation, ValueError):
        raise OrderError(f"malformed price {value!r}") from None
    if not price.is_finite():
        raise OrderError(f"malformed price {value!r}")
    if price < 0:
        raise OrderError(f"negative price {value}")
    return price


def parse_quantity(value: Any) -> int:
    if isinstance(value, bool):
        raise OrderError(f"malformed quantity {value!r}")
    if isinstance(value, int):
        quantity = value
    else:
        text = str(value).strip()
        try:
            quantity = int(text)
        except ValueError:
            raise OrderError(f"malformed quantity {value!r} (integer Wh expected)") from None
    if quantity <= 0:
        raise OrderError(f"non-positive quantity {quantity}")
    return quantity


def validate_order(record: Mapping[str, Any], sequence: int = 0) -> Offer | Bid:
    """Turn a raw record (``id, side, energy_wh, price[, participation]``) into an order.

    ``quantity`` is accepted as an alias of ``energy_wh``.
    """
    order_id = record.get("id")
    if order_id is None or str(order_id).strip() == "":
        raise OrderError("missing id")
    order_id = str(order_id).strip()

    side_text = str(record.get("side", "")).strip().lower()
    try:
        side = Side(side_text)
    except ValueError:
        raise OrderError(f"unknown side {record.get('side')!r}") from None

    if "energy_wh" in record:
        raw_quantity = record["energy_wh"]
    elif "quantity" in record:
        raw_quantity = record["quantity"]
    else:
        raise OrderError("missing energy_wh")
    if record.get("price") is None:
        raise OrderError("missing price")

    quantity = parse_quantity(raw_quantity)
    price = parse_price(record["price"])
    participation = Participation.parse(record.get("participation"))
    cls = Offer if side is Side.SELL else Bid
    return cls(order_id, quantity, price, participation, sequence)


def _rank_key(order: Order, descending: bool) -> tuple:
    price = -order.price if descending else order.price
    return (price, order.sequence, order.id)


@dataclass(frozen=True)
class OrderBook:
    """Sellers ascending by price, buyers descending; ties by sequence then id."""

    sellers: tuple[Offer, ...] = ()
    buyers: tuple[Bid, ...] = ()
    _seller_index: dict[str, int] = field(default_factory=dict, compare=False, repr=False)
    _buyer_index: dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_seller_index", {o.id: n for n, o in enumerate(self.sellers)})
        object.__setattr__(self, "_buyer_index", {b.id: n for n, b in enumerate(self.buyers)})

    @property
    def n_sellers(self) -> int:
        return len(self.sellers)

    @property
    def n_buyers(self) -> int:
        return len(self.buyers)

    def seller(self, seller_id: str) -> Offer:
        return self.sellers[self._seller_index[seller_id]]

    def buyer(self, buyer_id: str) -> Bid:
        return self.buyers[self._buyer_index[buyer_id]]

    def seller_rank(self, seller_id: str) -> int:
        """Zero-based position of a seller in the book."""
        return self._seller_index[seller_id]

    def buyer_rank(self, buyer_id: str) -> int:
        return self._buyer_index[buyer_id]

    def orders(self) -> list[Order]:
        """All orders by submission sequence."""
        return sorted([*self.sellers, *self.buyers], key=lambda o: (o.sequence, o.side.value, o.id))


def build_book(offers: Iterable[Offer], bids: Iterable[Bid]) -> OrderBook:
    offers = list(offers)
    bids = list(bids)
    for side, orders in (("sell", offers), ("buy", bids)):
        seen: set[str] = set()
        for order in orders:
            if order.id in seen:
                raise OrderError(f"duplicate {side} id {order.id!r}")
            seen.add(order.id)
    sellers = tuple(sorted(offers, key=lambda o: _rank_key(o, descending=False)))
    buyers = tuple(sorted(bids, key=lambda b: _rank_key(b, descending=True)))
    return OrderBook(sellers, buyers)


def split_orders(orders: Iterable[Order]) -> tuple[list[Offer], list[Bid]]:
    offers = [o for o in orders if isinstance(o, Offer)]
    bids = [o for o in orders if isinstance(o, Bid)]
    return offers, bids
