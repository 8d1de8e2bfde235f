"""Revenue, cost saving, TRC, satisfaction indices and market tendency."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .mechanisms import Settlement


def revenue(seller_id: str, settlement: Settlement) -> Fraction:
    """Seller's gain over its reservation price across all its trades."""
    if seller_id not in settlement.revenue_per_seller:
        raise KeyError(f"unknown seller {seller_id!r}")
    reservation = next(o for o in settlement.ledger.sellers if o.id == seller_id).exact_price
    return sum(
        ((p.seller_price - reservation) * p.kwh for p in settlement.priced_trades if p.seller_id == seller_id),
        Fraction(0),
    )


def cost_saving(buyer_id: str, settlement: Settlement) -> Fraction:
    if buyer_id not in settlement.saving_per_buyer:
        raise KeyError(f"unknown buyer {buyer_id!r}")
    bid = next(b for b in settlement.ledger.buyers if b.id == buyer_id).exact_price
    return sum(
        ((bid - p.buyer_price) * p.kwh for p in settlement.priced_trades if p.buyer_id == buyer_id),
        Fraction(0),
    )


def trc(settlement: Settlement) -> Fraction:
    """Total revenue of sellers plus total cost saving of buyers, summed per player."""
    sellers = sum((revenue(o.id, settlement) for o in settlement.ledger.sellers), Fraction(0))
    buyers = sum((cost_saving(b.id, settlement) for b in settlement.ledger.buyers), Fraction(0))
    return sellers + buyers


def trc_closed_form(settlement: Settlement) -> Fraction:
    """Price-free TRC: traded kWh times (bid - reservation price), summed over trades.

    Equals :func:`trc` whenever every trade is budget balanced.
    """
    reservation = {o.id: o.exact_price for o in settlement.ledger.sellers}
    bid = {b.id: b.exact_price for b in settlement.ledger.buyers}
    return sum(
        ((bid[p.buyer_id] - reservation[p.seller_id]) * p.kwh for p in settlement.priced_trades),
        Fraction(0),
    )


def ssi(seller_id: str, settlement: Settlement) -> Fraction | None:
    """Realised income over the income expected for the whole offer.

    ``None`` when the reservation price is zero.
    """
    offer = next((o for o in settlement.ledger.sellers if o.id == seller_id), None)
    if offer is None:
        raise KeyError(f"unknown seller {seller_id!r}")
    expected = offer.quantity * offer.exact_price
    if expected == 0:
        return None
    income = sum(
        (p.energy_wh * p.seller_price for p in settlement.priced_trades if p.seller_id == seller_id),
        Fraction(0),
    )
    return income / expected


def bsi(buyer_id: str, settlement: Settlement) -> Fraction | None:
    """Expected cost of the whole bid over the realised cost.

    ``None`` when the buyer paid nothing.
    """
    bid = next((b for b in settlement.ledger.buyers if b.id == buyer_id), None)
    if bid is None:
        raise KeyError(f"unknown buyer {buyer_id!r}")
    cost = sum(
        (p.energy_wh * p.buyer_price for p in settlement.priced_trades if p.buyer_id == buyer_id),
        Fraction(0),
    )
    if cost == 0:
        return None
    return bid.quantity * bid.exact_price / cost


@dataclass(frozen=True)
class TendencyParts:
    """Sums entering the market tendency index, kept so blocks can be pooled."""

    buyer_weighted: Fraction = Fraction(0)
    buyer_count: int = 0
    seller_weighted: Fraction = Fraction(0)
    seller_count: int = 0

    def __add__(self, other: "TendencyParts") -> "TendencyParts":
        return TendencyParts(
            self.buyer_weighted + other.buyer_weighted,
            self.buyer_count + other.buyer_count,
            self.seller_weighted + other.seller_weighted,
            self.seller_count + other.seller_count,
        )

    @property
    def value(self) -> Fraction | None:
        if self.buyer_count == 0 or self.seller_count == 0:
            return None
        denominator = self.seller_weighted / self.seller_count
        if denominator == 0:
            return None
        return (self.buyer_weighted / self.buyer_count) / denominator


def tendency_parts(settlement: Settlement) -> TendencyParts:
    # players whose index is undefined drop out of both the sum and the count
    ledger = settlement.ledger
    buyer_weighted, buyer_count = Fraction(0), 0
    for b in ledger.buyers:
        index = bsi(b.id, settlement)
        if index is not None:
            buyer_weighted += index * ledger.bought[b.id]
            buyer_count += 1
    seller_weighted, seller_count = Fraction(0), 0
    for o in ledger.sellers:
        index = ssi(o.id, settlement)
        if index is not None:
            seller_weighted += index * ledger.sold[o.id]
            seller_count += 1
    return TendencyParts(buyer_weighted, buyer_count, seller_weighted, seller_count)


def mti(settlement: Settlement) -> Fraction | None:
    """Market tendency index: above 1 favours buyers, below 1 favours sellers."""
    if not settlement.priced_trades:
        return None
    return tendency_parts(settlement).value


def pooled_mti(settlements: Iterable[Settlement]) -> Fraction | None:
    parts = TendencyParts()
    for s in settlements:
        if s.priced_trades:
            parts = parts + tendency_parts(s)
    return parts.value


def budget_balance(settlement: Settlement) -> Fraction:
    """What the intermediary keeps: buyer payments minus seller receipts."""
    return sum(
        ((p.buyer_price - p.seller_price) * p.kwh for p in settlement.priced_trades),
        Fraction(0),
    )


@dataclass(frozen=True)
class MarketIndices:
    trc: Fraction
    total_revenue: Fraction
    total_saving: Fraction
    budget_surplus: Fraction
    mti: Fraction | None
    ssi: dict[str, Fraction | None]
    bsi: dict[str, Fraction | None]


def market_indices(settlement: Settlement) -> MarketIndices:
    ledger = settlement.ledger
    return MarketIndices(
        trc=trc(settlement),
        total_revenue=settlement.total_revenue,
        total_saving=settlement.total_saving,
        budget_surplus=budget_balance(settlement),
        mti=mti(settlement),
        ssi={o.id: ssi(o.id, settlement) for o in ledger.sellers},
        bsi={b.id: bsi(b.id, settlement) for b in ledger.buyers},
    )
