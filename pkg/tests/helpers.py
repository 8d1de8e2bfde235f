"""Shared builders for tests: the worked 8x8 market and random instances."""

from __future__ import annotations

import itertools
import random
from dataclasses import replace
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

from hypothesis import strategies as st

from p2pmarket.clearing import determine
from p2pmarket.orderbook import Bid, Offer, OrderBook, Participation, build_book

DATA = Path(__file__).parent / "data"
SAMPLE_CSV = DATA / "sample_market.csv"

OFFER_PRICES = ["10.0", "10.5", "11.0", "12.0", "12.1", "12.5", "13.0", "13.2"]
OFFER_WH = [200, 150, 100, 150, 100, 100, 150, 100]
BID_PRICES = ["14.0", "13.5", "13.0", "12.5", "12.2", "12.0", "11.5", "11.0"]
BID_WH = [150, 150, 200, 100, 100, 100, 100, 100]

SAMPLE_LEDGER = [
    ("S1", "B1", 150),
    ("S1", "B2", 50),
    ("S2", "B2", 100),
    ("S2", "B3", 50),
    ("S3", "B3", 100),
    ("S4", "B3", 50),
    ("S4", "B4", 100),
    ("S5", "B5", 100),
]


def sample_orders() -> list:
    offers = [Offer(f"S{n + 1}", q, Decimal(p), sequence=n) for n, (p, q) in enumerate(zip(OFFER_PRICES, OFFER_WH))]
    bids = [Bid(f"B{n + 1}", q, Decimal(p), sequence=8 + n) for n, (p, q) in enumerate(zip(BID_PRICES, BID_WH))]
    return offers + bids


def sample_book() -> OrderBook:
    orders = sample_orders()
    return build_book(orders[:8], orders[8:])


def make_book(sellers, buyers) -> OrderBook:
    """``sellers``/``buyers``: iterables of ``(quantity, price[, participation])``."""
    offers, bids = [], []
    seq = 0
    for n, spec in enumerate(sellers):
        mode = spec[2] if len(spec) > 2 else Participation.FRACTIONAL
        offers.append(Offer(f"S{n + 1}", spec[0], Decimal(str(spec[1])), mode, seq))
        seq += 1
    for n, spec in enumerate(buyers):
        mode = spec[2] if len(spec) > 2 else Participation.FRACTIONAL
        bids.append(Bid(f"B{n + 1}", spec[0], Decimal(str(spec[1])), mode, seq))
        seq += 1
    return build_book(offers, bids)


def random_book(rng: random.Random, max_players: int = 20, max_wh: int = 500) -> OrderBook:
    modes = list(Participation)
    n_sell = rng.randint(0, max_players)
    n_buy = rng.randint(0, max_players)
    sellers = [(rng.randint(1, max_wh), Decimal(rng.randint(0, 3000)) / 100, rng.choice(modes)) for _ in range(n_sell)]
    buyers = [(rng.randint(1, max_wh), Decimal(rng.randint(0, 3000)) / 100, rng.choice(modes)) for _ in range(n_buy)]
    return make_book(sellers, buyers)


prices = st.integers(min_value=0, max_value=3000).map(lambda c: Decimal(c) / 100)
modes = st.sampled_from(list(Participation))


@st.composite
def books(draw, max_players: int = 12):
    sellers = draw(st.lists(st.tuples(st.integers(1, 500), prices, modes), max_size=max_players))
    buyers = draw(st.lists(st.tuples(st.integers(1, 500), prices, modes), max_size=max_players))
    return make_book(sellers, buyers)


def brute_force_best_surplus(sellers, buyers) -> Fraction:
    """Max of sum x_ij * (b_j - r_i) over every integral allocation within the caps.

    ``sellers``/``buyers`` are order objects; exhaustive, so only for tiny markets.
    """
    cells = [(i, j) for i in range(len(sellers)) for j in range(len(buyers))]
    gain = [buyers[j].exact_price - sellers[i].exact_price for i, j in cells]
    supply = [o.quantity for o in sellers]
    demand = [b.quantity for b in buyers]
    best = Fraction(0)

    def walk(k: int, acc: Fraction) -> None:
        nonlocal best
        if k == len(cells):
            best = max(best, acc)
            return
        i, j = cells[k]
        for amount in range(min(supply[i], demand[j]) + 1):
            supply[i] -= amount
            demand[j] -= amount
            walk(k + 1, acc + amount * gain[k])
            supply[i] += amount
            demand[j] += amount

    walk(0, Fraction(0))
    return best


def ledger_surplus(ledger) -> Fraction:
    reservation = {o.id: o.exact_price for o in ledger.sellers}
    bid = {b.id: b.exact_price for b in ledger.buyers}
    return sum((t.energy_wh * (bid[t.buyer_id] - reservation[t.seller_id]) for t in ledger.trades), Fraction(0))


def tiny_fractional_books(price_draws: int = 3, seed: int = 0):
    """Every quantity vector in {1,2,3} for 1..3 players per side, a few price draws each."""
    rng = random.Random(seed)
    for n_sell in range(1, 4):
        for n_buy in range(1, 4):
            for quantities in itertools.product(range(1, 4), repeat=n_sell + n_buy):
                for _ in range(price_draws):
                    sellers = [(q, rng.randint(0, 10)) for q in quantities[:n_sell]]
                    buyers = [(q, rng.randint(0, 10)) for q in quantities[n_sell:]]
                    yield make_book(sellers, buyers)


def balanced_book(rng: random.Random, max_players: int = 20):
    """Random book whose winners' supply equals their demand (prices fix the winners)."""
    while True:
        book = random_book(rng, max_players)
        winners = determine(book).n_sellers
        if winners:
            break
    # every quantity is at least 1, so the winners' supply can be split into `winners` parts
    total = sum(o.quantity for o in book.sellers[:winners])
    cuts = sorted(rng.sample(range(1, total), winners - 1))
    parts = [b - a for a, b in zip([0, *cuts], [*cuts, total])]
    bids = [replace(b, quantity=parts[n]) if n < winners else b for n, b in enumerate(book.buyers)]
    return build_book(book.sellers, bids)
