"""Instruments, tick-grid prices, orders, and exact money arithmetic.

All prices are integer tick indices on a finite grid.  All money amounts
are carried as exact signed integers ("quanta"): one quantum is the value
of one tick of price movement on one unit of quantity, already scaled by
the instrument multiplier.  Conversion to currency happens only at the
reporting boundary, so every accounting identity elsewhere in the package
can be checked with exact integer equality.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from enum import Enum

# Exact signed integer count of tick-value quanta.
Money = int

SELL = +1
BUY = -1


class Side(Enum):
    BUY = "buy"
    SELL = "sell"


def side_sign(side: Side) -> int:
    """PnL-contribution sign: +1 for a sell, -1 for a buy."""
    return SELL if side is Side.SELL else BUY


def sign_side(sign: int) -> Side:
    if sign == SELL:
        return Side.SELL
    if sign == BUY:
        return Side.BUY
    raise ValueError(f"sign must be +1 or -1, got {sign}")


@dataclass(frozen=True)
class Instrument:
    """A tradable instrument on a finite tick grid.

    multiplier is the currency value of one full price point per unit of
    quantity; tick_size is the price increment in currency.  grid_min and
    grid_max bound the set of admissible tick indices.
    """
    symbol: str
    multiplier: int
    tick_size: Decimal
    grid_min: int
    grid_max: int

    def __post_init__(self) -> None:
        if self.multiplier < 1:
            raise ValueError(f"multiplier must be >= 1, got {self.multiplier}")
        if self.tick_size <= 0:
            raise ValueError(f"tick_size must be > 0, got {self.tick_size}")
        if self.grid_min >= self.grid_max:
            raise ValueError(
                f"grid_min must be < grid_max, got [{self.grid_min}, {self.grid_max}]")

    @property
    def grid_width(self) -> int:
        return self.grid_max - self.grid_min

    def contains(self, price_ticks: int) -> bool:
        return self.grid_min <= price_ticks <= self.grid_max


@dataclass(frozen=True)
class Order:
    """One fill: (id, time, sign, price, quantity).

    price is an integer tick index; sign is +1 (sell) or -1 (buy).
    """
    id: int
    time: int
    sign: int
    price: int
    quantity: int

    def __post_init__(self) -> None:
        if self.id < 1:
            raise ValueError(f"order id must be >= 1, got {self.id}")
        if self.time < 0:
            raise ValueError(f"order time must be >= 0, got {self.time}")
        if self.sign not in (SELL, BUY):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.quantity < 1:
            raise ValueError(f"quantity must be >= 1, got {self.quantity}")

    @property
    def side(self) -> Side:
        return sign_side(self.sign)


def price_to_currency(price_ticks: int, instrument: Instrument) -> Decimal:
    """Render a grid price in currency: price_ticks * tick_size."""
    if not instrument.contains(price_ticks):
        raise ValueError(
            f"price {price_ticks} outside grid "
            f"[{instrument.grid_min}, {instrument.grid_max}]")
    return price_ticks * instrument.tick_size


def currency_to_price(value: Decimal, instrument: Instrument) -> int:
    """Inverse of price_to_currency; rejects values not on the grid."""
    ratio = value / instrument.tick_size
    ticks = int(ratio)
    if ticks != ratio:
        raise ValueError(f"{value} is not a multiple of tick size "
                         f"{instrument.tick_size}")
    if not instrument.contains(ticks):
        raise ValueError(f"{value} maps to off-grid tick index {ticks}")
    return ticks


def quanta_to_currency(quanta: Money, instrument: Instrument) -> Decimal:
    """Render a quanta amount in currency.

    Quanta already carry the multiplier (they are multiplier * ticks * qty),
    so rendering only scales by the tick size.
    """
    return quanta * instrument.tick_size


def fill_price(raw_price: int, sign: int, half_spread: int) -> int:
    """Side-adjusted fill price: buys fill at P + spread, sells at P - spread."""
    return raw_price - sign * half_spread
