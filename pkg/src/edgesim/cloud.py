"""Order-cloud statistics and the exact rational gravity center.

The gravity center of a fill set is the quantity-weighted average price
of all fills so far.  It is generally not on the tick grid, so it is kept
as an exact rational (fractions.Fraction) and never rounded: the delay
and execution events downstream are strict inequalities that rounding
could flip.

Hot paths avoid Fraction construction by comparing an integer pair
(numerator, denominator) against tick prices with cross-multiplication;
the helpers at the bottom are that single shared primitive.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .market import SELL, Order

# Exact rational carrier for off-grid price levels.
RationalPrice = Fraction


@dataclass(frozen=True)
class CloudStats:
    """Running totals over a strategy's filled orders.

    Weighted sums are in tick*quantity units.  min/max fill prices are
    None until the first fill.
    """
    fill_count: int = 0
    qty_sell: int = 0
    qty_buy: int = 0
    weighted_sum_sell: int = 0
    weighted_sum_buy: int = 0
    min_fill_price: int | None = None
    max_fill_price: int | None = None


EMPTY_CLOUD = CloudStats()


def cloud_update(stats: CloudStats, fill: Order) -> CloudStats:
    """Fold one fill into the running totals (O(1))."""
    lo = fill.price if stats.min_fill_price is None else min(stats.min_fill_price, fill.price)
    hi = fill.price if stats.max_fill_price is None else max(stats.max_fill_price, fill.price)
    if fill.sign == SELL:
        return replace(stats,
                       fill_count=stats.fill_count + 1,
                       qty_sell=stats.qty_sell + fill.quantity,
                       weighted_sum_sell=stats.weighted_sum_sell + fill.price * fill.quantity,
                       min_fill_price=lo, max_fill_price=hi)
    return replace(stats,
                   fill_count=stats.fill_count + 1,
                   qty_buy=stats.qty_buy + fill.quantity,
                   weighted_sum_buy=stats.weighted_sum_buy + fill.price * fill.quantity,
                   min_fill_price=lo, max_fill_price=hi)


def gravity_center(stats: CloudStats) -> RationalPrice | None:
    """Quantity-weighted average fill price; None while the cloud is empty."""
    if stats.fill_count == 0:
        return None
    return Fraction(stats.weighted_sum_sell + stats.weighted_sum_buy,
                    stats.qty_sell + stats.qty_buy)


# -- exact integer-pair comparisons -----------------------------------------
#
# A rational level num/den (den > 0) compared against integers without
# constructing Fraction objects.  These are the only comparison primitives
# used by the dominance engine's event checks.

def rational_gt(num: int, den: int, value: int) -> bool:
    """num/den > value, exactly."""
    return num > value * den


def rational_lt(num: int, den: int, value: int) -> bool:
    """num/den < value, exactly."""
    return num < value * den


def rational_pair_max(n1: int, d1: int, n2: int, d2: int) -> tuple[int, int]:
    """The larger of n1/d1 and n2/d2 (dens positive), as a pair."""
    return (n1, d1) if n1 * d2 >= n2 * d1 else (n2, d2)


def rational_pair_min(n1: int, d1: int, n2: int, d2: int) -> tuple[int, int]:
    """The smaller of n1/d1 and n2/d2 (dens positive), as a pair."""
    return (n1, d1) if n1 * d2 <= n2 * d1 else (n2, d2)
