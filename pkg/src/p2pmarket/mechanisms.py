"""Payment rules: price an allocation under each supported mechanism.

All prices and money are exact :class:`~fractions.Fraction` values. Money for a
trade is ``price * energy_wh / 1000`` since prices are per kWh.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

from .clearing import (
    Determination,
    Perspective,
    Trade,
    TradeLedger,
    allocate,
    restrict,
)
from .orderbook import OrderBook

WH_PER_KWH = 1000


class Mechanism(Enum):
    PROPOSED = "proposed"
    UNIFORM = "uniform"
    PAY_AS_BID = "pay_as_bid"
    VICKREY = "vickrey"
    GSP = "gsp"
    AVERAGE = "average"
    VCG = "vcg"
    TRADE_REDUCTION = "trade_reduction"
    MCAFEE = "mcafee"

    @property
    def sbb(self) -> bool:
        """Strongly budget balanced on every instance."""
        return self not in (Mechanism.VCG, Mechanism.TRADE_REDUCTION, Mechanism.MCAFEE)

    @property
    def reduces_trade(self) -> bool:
        return self in (Mechanism.TRADE_REDUCTION, Mechanism.MCAFEE)

    @classmethod
    def parse(cls, name: "str | Mechanism") -> "Mechanism":
        if isinstance(name, Mechanism):
            return name
        key = name.strip().lower().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown mechanism {name!r} (choose from {choices})") from None


@dataclass(frozen=True)
class PricedTrade:
    trade: Trade
    seller_price: Fraction
    buyer_price: Fraction

    @property
    def seller_id(self) -> str:
        return self.trade.seller_id

    @property
    def buyer_id(self) -> str:
        return self.trade.buyer_id

    @property
    def energy_wh(self) -> int:
        return self.trade.energy_wh

    @property
    def kwh(self) -> Fraction:
        return Fraction(self.trade.energy_wh, WH_PER_KWH)


@dataclass(frozen=True)
class Settlement:
    mechanism: Mechanism
    determination: Determination
    ledger: TradeLedger
    priced_trades: tuple[PricedTrade, ...]
    revenue_per_seller: dict[str, Fraction]
    saving_per_buyer: dict[str, Fraction]
    total_revenue: Fraction
    total_saving: Fraction
    trc: Fraction
    auctioneer_surplus: Fraction
    reduced: bool = False

    @property
    def budget_balanced(self) -> bool:
        return all(p.seller_price == p.buyer_price for p in self.priced_trades)


PriceRule = Callable[[Trade], Fraction]


def price_ledger(
    mechanism: Mechanism,
    determination: Determination,
    ledger: TradeLedger,
    seller_price: PriceRule,
    buyer_price: PriceRule | None = None,
    reduced: bool = False,
) -> Settlement:
    """Attach prices to every trade and compute revenues, savings and totals.

    ``buyer_price`` defaults to ``seller_price`` (budget-balanced pricing).
    """
    if buyer_price is None:
        buyer_price = seller_price
    priced = tuple(PricedTrade(t, Fraction(seller_price(t)), Fraction(buyer_price(t))) for t in ledger.trades)

    reservation = {o.id: o.exact_price for o in ledger.sellers}
    bid = {b.id: b.exact_price for b in ledger.buyers}
    revenue = {o.id: Fraction(0) for o in ledger.sellers}
    saving = {b.id: Fraction(0) for b in ledger.buyers}
    surplus = Fraction(0)
    for p in priced:
        revenue[p.seller_id] += (p.seller_price - reservation[p.seller_id]) * p.kwh
        saving[p.buyer_id] += (bid[p.buyer_id] - p.buyer_price) * p.kwh
        surplus += (p.buyer_price - p.seller_price) * p.kwh

    total_revenue = sum(revenue.values(), Fraction(0))
    total_saving = sum(saving.values(), Fraction(0))
    return Settlement(
        mechanism=mechanism,
        determination=determination,
        ledger=ledger,
        priced_trades=priced,
        revenue_per_seller=revenue,
        saving_per_buyer=saving,
        total_revenue=total_revenue,
        total_saving=total_saving,
        trc=total_revenue + total_saving,
        auctioneer_surplus=surplus,
        reduced=reduced,
    )


def _exact(value) -> Fraction:
    return Fraction(value)


def price_proposed(ledger: TradeLedger, book: OrderBook) -> list[Fraction]:
    """Midpoint of the matched reservation price and bid, per trade."""
    return [
        (book.sellers[t.seller_rank].exact_price + book.buyers[t.buyer_rank].exact_price) / 2
        for t in ledger.trades
    ]


def price_uniform(determination: Determination) -> Fraction:
    """Single level at the lowest winning bid."""
    return _exact(determination.boundary_buyer_price)


def price_pay_as_bid(ledger: TradeLedger, book: OrderBook) -> list[Fraction]:
    return [book.buyers[t.buyer_rank].exact_price for t in ledger.trades]


def price_vickrey(determination: Determination) -> Fraction:
    """Single level at the highest losing bid, or the lowest winning bid if none lost."""
    if determination.next_buyer_price is not None:
        return _exact(determination.next_buyer_price)
    return _exact(determination.boundary_buyer_price)


def price_gsp(ledger: TradeLedger, book: OrderBook) -> list[Fraction]:
    """Each buyer pays the bid ranked just below its own (own bid if it is last)."""
    prices = []
    for t in ledger.trades:
        nxt = t.buyer_rank + 1
        source = book.buyers[nxt] if nxt < book.n_buyers else book.buyers[t.buyer_rank]
        prices.append(source.exact_price)
    return prices


def price_average(determination: Determination, book: OrderBook) -> Fraction:
    """Mean of every winning reservation price and every winning bid."""
    winners = [o.exact_price for o in book.sellers[: determination.n_sellers]]
    winners += [b.exact_price for b in book.buyers[: determination.n_buyers]]
    return sum(winners, Fraction(0)) / len(winners)


def price_vcg(determination: Determination) -> tuple[Fraction, Fraction]:
    """``(seller level, buyer level)``; the seller level is never below the buyer level."""
    boundary_bid = _exact(determination.boundary_buyer_price)
    boundary_offer = _exact(determination.boundary_seller_price)
    seller_level = boundary_bid
    if determination.next_seller_price is not None:
        seller_level = min(boundary_bid, _exact(determination.next_seller_price))
    buyer_level = boundary_offer
    if determination.next_buyer_price is not None:
        buyer_level = max(boundary_offer, _exact(determination.next_buyer_price))
    return seller_level, buyer_level


def _per_trade(ledger: TradeLedger, prices: Sequence[Fraction]) -> PriceRule:
    lookup = {(t.seller_rank, t.buyer_rank): p for t, p in zip(ledger.trades, prices)}
    return lambda t: lookup[(t.seller_rank, t.buyer_rank)]


def _constant(level: Fraction) -> PriceRule:
    return lambda t: level


def settle_trade_reduction(
    book: OrderBook,
    determination: Determination,
    perspective: Perspective | None = None,
    mechanism: Mechanism = Mechanism.TRADE_REDUCTION,
) -> Settlement:
    """Drop the marginal seller and buyer, re-allocate, and price at their prices.

    Remaining sellers receive the dropped seller's reservation price and
    remaining buyers pay the dropped buyer's bid.
    """
    keep = max(determination.n_sellers - 1, 0)
    reduced_book, reduced_det = restrict(book, keep)
    ledger = allocate(reduced_book, reduced_det, perspective)
    if not ledger.trades:
        return price_ledger(mechanism, determination, ledger, _constant(Fraction(0)), reduced=True)
    seller_level = _exact(determination.boundary_seller_price)
    buyer_level = _exact(determination.boundary_buyer_price)
    return price_ledger(
        mechanism, determination, ledger, _constant(seller_level), _constant(buyer_level), reduced=True
    )


def mcafee_price(determination: Determination) -> Fraction | None:
    """Midpoint of the first losing offer and bid, when it lies between the marginal winners."""
    if determination.next_seller_price is None or determination.next_buyer_price is None:
        return None
    candidate = (_exact(determination.next_seller_price) + _exact(determination.next_buyer_price)) / 2
    if _exact(determination.boundary_seller_price) <= candidate <= _exact(determination.boundary_buyer_price):
        return candidate
    return None


def settle_mcafee(
    book: OrderBook,
    determination: Determination,
    perspective: Perspective | None = None,
    ledger: TradeLedger | None = None,
) -> Settlement:
    if not determination.has_winners:
        return settle_trade_reduction(book, determination, perspective, Mechanism.MCAFEE)
    level = mcafee_price(determination)
    if level is None:
        return settle_trade_reduction(book, determination, perspective, Mechanism.MCAFEE)
    if ledger is None:
        ledger = allocate(book, determination, perspective)
    return price_ledger(Mechanism.MCAFEE, determination, ledger, _constant(level))


def settle(
    book: OrderBook,
    determination: Determination,
    ledger: TradeLedger,
    mechanism: Mechanism | str,
    perspective: Perspective | None = None,
) -> Settlement:
    """Price ``ledger`` under ``mechanism``.

    Trade-reducing mechanisms ignore ``ledger`` where they shrink the winner
    set and re-run allocation on the reduced book; ``perspective`` is used for
    that re-allocation (``None`` picks it from the reduced totals).
    """
    mechanism = Mechanism.parse(mechanism)
    if mechanism is Mechanism.TRADE_REDUCTION:
        return settle_trade_reduction(book, determination, perspective)
    if mechanism is Mechanism.MCAFEE:
        return settle_mcafee(book, determination, perspective, ledger)
    if not ledger.trades:
        return price_ledger(mechanism, determination, ledger, _constant(Fraction(0)))

    if mechanism is Mechanism.PROPOSED:
        rule = _per_trade(ledger, price_proposed(ledger, book))
    elif mechanism is Mechanism.PAY_AS_BID:
        rule = _per_trade(ledger, price_pay_as_bid(ledger, book))
    elif mechanism is Mechanism.GSP:
        rule = _per_trade(ledger, price_gsp(ledger, book))
    elif mechanism is Mechanism.UNIFORM:
        rule = _constant(price_uniform(determination))
    elif mechanism is Mechanism.VICKREY:
        rule = _constant(price_vickrey(determination))
    elif mechanism is Mechanism.AVERAGE:
        rule = _constant(price_average(determination, book))
    elif mechanism is Mechanism.VCG:
        seller_level, buyer_level = price_vcg(determination)
        return price_ledger(mechanism, determination, ledger, _constant(seller_level), _constant(buyer_level))
    else:  # pragma: no cover - exhaustive over Mechanism
        raise ValueError(mechanism)
    return price_ledger(mechanism, determination, ledger, rule)
