"""Deterministic market clearing for peer-to-peer energy double auctions."""

from .clearing import (
    Determination,
    Perspective,
    StaleInputError,
    Trade,
    TradeLedger,
    allocate,
    determine,
    select_perspective,
)
from .mechanisms import Mechanism, PricedTrade, Settlement, settle
from .metrics import MarketIndices, market_indices
from .orderbook import Bid, Offer, OrderBook, OrderError, Participation, build_book, validate_order

__all__ = [
    "Bid",
    "Determination",
    "MarketIndices",
    "Mechanism",
    "Offer",
    "OrderBook",
    "OrderError",
    "Participation",
    "Perspective",
    "PricedTrade",
    "Settlement",
    "StaleInputError",
    "Trade",
    "TradeLedger",
    "allocate",
    "build_book",
    "determine",
    "market_indices",
    "select_perspective",
    "settle",
    "validate_order",
]

__version__ = "0.1.0"
