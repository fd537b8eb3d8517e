"""The order cloud and its gravity center.

The gravity center is the quantity-weighted average price of every fill
so far.  It usually falls between grid prices, so it is carried as an
exact rational; the strict inequalities of the delay/release events are
decided by integer cross-multiplication, never by rounding.
"""

from fractions import Fraction

from edgesim import EMPTY_CLOUD, Order, cloud_update, gravity_center

print("an empty cloud has no gravity center:", gravity_center(EMPTY_CLOUD))

fills = [
    Order(id=1, time=1, sign=+1, price=10200, quantity=2),  # sell 2 @ 102.00
    Order(id=2, time=4, sign=-1, price=10000, quantity=3),  # buy  3 @ 100.00
]

stats = EMPTY_CLOUD
for fill in fills:
    stats = cloud_update(stats, fill)
    c = gravity_center(stats)
    print(f"after fill {fill.id}: qty sell/buy = {stats.qty_sell}/"
          f"{stats.qty_buy}, gravity center = {c} "
          f"(~{float(c):.2f} ticks)")

c = gravity_center(stats)
assert c == Fraction(2 * 10200 + 3 * 10000, 5) == 10080
assert stats.min_fill_price <= c <= stats.max_fill_price
print("the center sits inside [min fill, max fill]:",
      stats.min_fill_price, "<=", c, "<=", stats.max_fill_price)

# A third fill drags the average; the arithmetic stays exact.
stats = cloud_update(stats, Order(id=3, time=9, sign=-1, price=10033,
                                  quantity=1))
print("after an odd lot the center is a true rational:",
      gravity_center(stats))
