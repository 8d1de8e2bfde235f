"""Winner determination at the breakeven index and greedy energy allocation."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum
from typing import Sequence

from .orderbook import Bid, Offer, Order, OrderBook


class Perspective(Enum):
    BUYER = "buyer"
    SELLER = "seller"


class StaleInputError(ValueError):
    """A determination or ledger does not belong to the book it was passed with."""


@dataclass(frozen=True)
class Determination:
    n_sellers: int
    n_buyers: int
    boundary_seller_price: Decimal | None
    boundary_buyer_price: Decimal | None
    next_seller_price: Decimal | None
    next_buyer_price: Decimal | None
    total_supply: int
    total_demand: int

    @property
    def has_winners(self) -> bool:
        return self.n_sellers > 0 and self.n_buyers > 0


def _determination_for(book: OrderBook, winners: int) -> Determination:
    sellers, buyers = book.sellers, book.buyers
    return Determination(
        n_sellers=winners,
        n_buyers=winners,
        boundary_seller_price=sellers[winners - 1].price if winners else None,
        boundary_buyer_price=buyers[winners - 1].price if winners else None,
        next_seller_price=sellers[winners].price if winners < len(sellers) else None,
        next_buyer_price=buyers[winners].price if winners < len(buyers) else None,
        total_supply=sum(o.quantity for o in sellers[:winners]),
        total_demand=sum(b.quantity for b in buyers[:winners]),
    )


def determine(book: OrderBook) -> Determination:
    """Largest rank ``l`` whose ``l``-th highest bid meets the ``l``-th lowest offer.

    The same count of sellers and buyers win; an empty or non-crossing book
    gives a zero determination.
    """
    winners = 0
    for rank in range(min(book.n_sellers, book.n_buyers)):
        if book.buyers[rank].price >= book.sellers[rank].price:
            winners = rank + 1
    return _determination_for(book, winners)


def select_perspective(determination: Determination) -> Perspective:
    if determination.total_supply > determination.total_demand:
        return Perspective.SELLER
    return Perspective.BUYER


@dataclass(frozen=True)
class Trade:
    seller_id: str
    buyer_id: str
    energy_wh: int
    seller_rank: int  # zero-based position in the book
    buyer_rank: int


@dataclass(frozen=True)
class TradeLedger:
    trades: tuple[Trade, ...]
    sellers: tuple[Offer, ...]  # winners, in book order
    buyers: tuple[Bid, ...]
    sold: dict[str, int]
    bought: dict[str, int]
    unsold: int
    unserved: int
    perspective: Perspective

    @property
    def traded_energy(self) -> int:
        return sum(t.energy_wh for t in self.trades)

    def trades_of_seller(self, seller_id: str) -> list[Trade]:
        return [t for t in self.trades if t.seller_id == seller_id]

    def trades_of_buyer(self, buyer_id: str) -> list[Trade]:
        return [t for t in self.trades if t.buyer_id == buyer_id]

    def as_tuples(self) -> list[tuple[str, str, int]]:
        return [(t.seller_id, t.buyer_id, t.energy_wh) for t in self.trades]


def _drain(drivers: Sequence[Order], pool: Sequence[Order]) -> list[tuple[int, int, int]]:
    """Serve ``drivers`` in rank order from ``pool`` in rank order.

    The first driver whose remaining need exceeds what is left in the pool is
    the marginal one: it takes everything left when fractional and nothing
    otherwise. Drivers after it receive nothing. Returns
    ``(driver index, pool index, quantity)`` triples.
    """
    remaining = [o.quantity for o in pool]
    left = sum(remaining)
    cursor = 0
    out: list[tuple[int, int, int]] = []
    for d, driver in enumerate(drivers):
        need = driver.quantity
        if need > left:
            need = left if driver.is_fractional else 0
            stop = True
        else:
            stop = False
        left -= need
        while need > 0:
            take = min(need, remaining[cursor])
            if take:
                out.append((d, cursor, take))
                remaining[cursor] -= take
                need -= take
            if remaining[cursor] == 0:
                cursor += 1
        if stop:
            break
    return out


def _check_fresh(book: OrderBook, determination: Determination) -> None:
    n = determination.n_sellers
    if (
        n != determination.n_buyers
        or n > min(book.n_sellers, book.n_buyers)
        or _determination_for(book, n) != determination
    ):
        raise StaleInputError("determination does not match this order book")


def allocate(
    book: OrderBook,
    determination: Determination,
    perspective: Perspective | None = None,
) -> TradeLedger:
    """Greedy fractional-knapsack matching of the winning sellers and buyers.

    With ``perspective=None`` the side is chosen by :func:`select_perspective`.
    """
    _check_fresh(book, determination)
    if perspective is None:
        perspective = select_perspective(determination)
    sellers = book.sellers[: determination.n_sellers]
    buyers = book.buyers[: determination.n_buyers]

    if perspective is Perspective.BUYER:
        triples = [(s, b, q) for b, s, q in _drain(buyers, sellers)]
    else:
        triples = _drain(sellers, buyers)
    triples.sort()

    trades = tuple(Trade(sellers[s].id, buyers[b].id, q, s, b) for s, b, q in triples)
    sold = {o.id: 0 for o in sellers}
    bought = {b.id: 0 for b in buyers}
    for t in trades:
        sold[t.seller_id] += t.energy_wh
        bought[t.buyer_id] += t.energy_wh
    traded = sum(t.energy_wh for t in trades)
    return TradeLedger(
        trades=trades,
        sellers=tuple(sellers),
        buyers=tuple(buyers),
        sold=sold,
        bought=bought,
        unsold=determination.total_supply - traded,
        unserved=determination.total_demand - traded,
        perspective=perspective,
    )


def restrict(book: OrderBook, winners: int) -> tuple[OrderBook, Determination]:
    """Book holding only the first ``winners`` sellers and buyers, fully crossing."""
    reduced = OrderBook(book.sellers[:winners], book.buyers[:winners])
    return reduced, _determination_for(reduced, winners)
