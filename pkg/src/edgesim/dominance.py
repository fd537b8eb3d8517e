"""The delayed-execution overlay strategy and its proof-chain checks.

The overlay runs alongside a baseline and fills the same orders, except
that during its second stage it may hold an order back in a bounded
queue and release it later at a strictly better price.  The engine is a
phase/stage state machine:

  Stage 1   mirror the next stage1_fill_count baseline fills exactly,
            seeding the overlay's own order cloud.
  Stage 2   each new baseline fill is a delay candidate: one Bernoulli
            draw, then the tolerance test against the overlay's own
            gravity center (sign * (C - P) > tau), a queue-capacity
            check, an optional minimum price spacing against queued
            entries, and a reachability guard keeping the implied gain
            level inside the grid.  Candidates that pass are enqueued
            with a frozen snapshot of the gravity center; all others
            fill immediately, identically to the baseline.

Every tick the queue is scanned in enqueue order and an entry is
released once the price clears its gain threshold,
sign * (P - minmax_sign(C_now, C_frozen)) > gamma.  The frozen snapshot
anchors the threshold, which yields the per-order guarantee

    sign * (execution_price - delay_price) > gamma + tau   (exact)

and, summed over a phase, the lower bound on the PnL difference checked
by phase_pnl_diff_check.  A phase ends when the queue empties after at
least one delay; the engine then re-enters Stage 1.

Decision inputs (gravity center, tolerance and gain tests, spacing
filter) are computed on unadjusted grid prices so that commissions and
the bid/ask half-spread can never alter the decision path; fills carry
side-adjusted prices and the adjustments cancel exactly in every
difference the checks assert.

All event comparisons are exact: integer cross-multiplication against
the rational gravity center, never floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .accounting import pnl_direct
from .cloud import (CloudStats, RationalPrice, rational_pair_max,
                    rational_pair_min)
from .market import SELL, Instrument, Money, Order

MIRROR = "mirror"
ENQUEUE = "enqueue"
FORCED = "forced"

# Stable clause identifiers shared by the in-run checks and the offline
# audit in edgesim.verify.
CLAUSE_PER_ORDER_GAP = "per_order_gap"
CLAUSE_PHASE_IDENTITY = "phase_end_identity"
CLAUSE_LOWER_BOUND = "phase_lower_bound"
CLAUSE_POSITIVITY = "phase_positivity"
CLAUSE_MONOTONICITY = "phase_monotonicity"
CLAUSE_QUEUE_CAP = "queue_cap"
CLAUSE_POSITION_MATCH = "phase_position_match"
CLAUSE_TICK_CONSISTENCY = "tick_phase_consistency"


class SimulationError(Exception):
    pass


class StrandedOrderError(SimulationError):
    """A phase exceeded its tick budget with orders still queued."""

    def __init__(self, phase_index: int, elapsed: int,
                 entries: Sequence["DelayQueueEntry"]):
        self.phase_index = phase_index
        self.elapsed = elapsed
        self.entries = tuple(entries)
        names = ", ".join(f"order {e.order_id} (sign {e.sign:+d}, "
                          f"delayed at t={e.delay_time})" for e in entries)
        super().__init__(
            f"phase {phase_index} exceeded {elapsed} ticks with "
            f"{len(entries)} queued order(s): {names or 'none'}; the "
            f"recurrence precondition or parameter validation has failed")


class InvariantViolation(SimulationError):
    def __init__(self, clause: str, message: str):
        self.clause = clause
        super().__init__(f"[{clause}] {message}")


@dataclass(frozen=True)
class DominanceParams:
    tau: int = 25
    gamma: int = 25
    delay_probability: Fraction = Fraction(1, 2)
    queue_cap: int = 3
    min_distance: int = 0          # 0 disables the spacing filter
    stage1_fill_count: int = 5
    max_phase_ticks: int = 50_000_000

    def __post_init__(self) -> None:
        if self.tau < 1:
            raise ValueError("tau must be >= 1 tick")
        if self.gamma < 1:
            raise ValueError("gamma must be >= 1 tick")
        if not 0 < self.delay_probability <= 1:
            raise ValueError("delay_probability must be in (0, 1]")
        if self.queue_cap < 1:
            raise ValueError("queue_cap must be >= 1")
        if self.min_distance < 0:
            raise ValueError("min_distance must be >= 0")
        if self.stage1_fill_count < 1:
            raise ValueError("stage1_fill_count must be >= 1")
        if self.max_phase_ticks < 1:
            raise ValueError("max_phase_ticks must be >= 1")

    def validate_for_grid(self, grid_min: int, grid_max: int) -> None:
        if 2 * (self.tau + self.gamma) >= grid_max - grid_min:
            raise ValueError(
                f"tau + gamma = {self.tau + self.gamma} must be strictly "
                f"less than half the grid width {grid_max - grid_min}")


@dataclass(frozen=True)
class DelayQueueEntry:
    """A delayed order plus the context frozen at delay time."""
    order_id: int
    sign: int
    quantity: int
    delay_time: int
    base_fill_price: int      # price the baseline actually paid (side-adjusted)
    delay_grid_price: int     # unadjusted grid price at the delay tick
    gravity_num: int          # gravity center at delay time, as an exact pair
    gravity_den: int
    delta_T_at_delay: Fraction
    frozen_trigger: int       # first grid price that could ever release this entry

    @property
    def gravity_at_delay(self) -> RationalPrice:
        return Fraction(self.gravity_num, self.gravity_den)


@dataclass(frozen=True)
class DelayedOrderRecord:
    """One completed delay: enqueue context plus the eventual execution."""
    order_id: int
    sign: int
    quantity: int
    delay_time: int
    base_fill_price: int
    execution_time: int
    execution_price: int
    delta_T_at_delay: Fraction
    delta_G_at_execution: Fraction

    @property
    def gap(self) -> int:
        """sign * (execution price - delay price); exceeds gamma + tau."""
        return self.sign * (self.execution_price - self.base_fill_price)


@dataclass(frozen=True)
class PhaseReport:
    """End-of-phase snapshot; quantities and the PnL difference are
    cumulative from the start of the run, records are this phase's."""
    phase_index: int
    end_time: int
    delayed_quantity: int
    pnl_diff: Money
    lower_bound: Money
    records: tuple[DelayedOrderRecord, ...]

    @property
    def n_delayed(self) -> int:
        return len(self.records)


def minmax(sign: int, x, y) -> Fraction:
    """Midpoint plus sign times the semi-distance: the max of x and y for
    sign +1, the min for sign -1."""
    fx, fy = Fraction(x), Fraction(y)
    return (fx + fy) / 2 + sign * abs(fx - fy) / 2


def delay_eligible(price: int, gravity: RationalPrice | None, sign: int,
                   tau: int) -> bool:
    """Tolerance test sign * (C - P) > tau; False while C is undefined."""
    if gravity is None:
        return False
    num, den = gravity.numerator, gravity.denominator
    return sign * (num - price * den) > tau * den


def execution_ready(price: int, gravity_now: RationalPrice,
                    gravity_at_delay: RationalPrice, sign: int,
                    gamma: int) -> bool:
    """Gain test sign * (P - minmax_sign(C_now, C_frozen)) > gamma."""
    n1, d1 = gravity_now.numerator, gravity_now.denominator
    n2, d2 = gravity_at_delay.numerator, gravity_at_delay.denominator
    if sign == SELL:
        mn, md = rational_pair_max(n1, d1, n2, d2)
    else:
        mn, md = rational_pair_min(n1, d1, n2, d2)
    return sign * (price * md - mn) > gamma * md


def _sell_trigger(num: int, den: int, gamma: int) -> int:
    """Smallest integer P with P > num/den + gamma."""
    return (num + gamma * den) // den + 1


def _buy_trigger(num: int, den: int, gamma: int) -> int:
    """Largest integer P with P < num/den - gamma."""
    return (num - gamma * den - 1) // den


class DominanceEngine:
    """One overlay instance: phase state machine, cloud, delay queue.

    The engine owns the overlay's decision state only; order histories
    and PnL aggregation live in the harness.  delay_draw is called once
    per Stage-2 candidate and returns True when the Bernoulli delay
    variable comes up 1.
    """

    def __init__(self, params: DominanceParams, grid_min: int, grid_max: int,
                 half_spread: int, delay_draw: Callable[[], bool]):
        params.validate_for_grid(grid_min, grid_max)
        if half_spread < 0:
            raise ValueError("half_spread must be >= 0")
        self.params = params
        self.grid_min = grid_min
        self.grid_max = grid_max
        self.half_spread = half_spread
        self.delay_draw = delay_draw

        # Order cloud over unadjusted grid prices.
        self._qty_sell = 0
        self._qty_buy = 0
        self._ws_sell = 0
        self._ws_buy = 0
        self._fill_count = 0
        self._min_fill: int | None = None
        self._max_fill: int | None = None

        self.phase_index = 1
        self.stage = 1
        self._stage1_remaining = params.stage1_fill_count
        self.phase_start_time = 0
        self.delays_this_phase = 0
        self.queue: list[DelayQueueEntry] = []
        # Frozen conservative release levels over the current queue: no
        # sell entry can release below frozen_sell_min and no buy entry
        # above frozen_buy_max, regardless of later cloud movement.  They
        # change only when the queue changes, so callers may use them to
        # skip scans over price stretches that provably release nothing.
        self.frozen_sell_min: int | None = None
        self.frozen_buy_max: int | None = None

        self.records: list[DelayedOrderRecord] = []
        self._phase_records: list[DelayedOrderRecord] = []
        self.last_phase_records: tuple[DelayedOrderRecord, ...] = ()
        self.last_phase_end_time = 0
        self.q_delayed_total = 0      # cumulative quantity over delayed orders
        self.gap_weighted_total = 0   # cumulative sum sign*(p_exec - p_delay)*qty

    # -- cloud ---------------------------------------------------------

    def _cloud_add(self, sign: int, quantity: int, raw_price: int) -> None:
        if sign == SELL:
            self._qty_sell += quantity
            self._ws_sell += raw_price * quantity
        else:
            self._qty_buy += quantity
            self._ws_buy += raw_price * quantity
        self._fill_count += 1
        if self._min_fill is None or raw_price < self._min_fill:
            self._min_fill = raw_price
        if self._max_fill is None or raw_price > self._max_fill:
            self._max_fill = raw_price

    def cloud_stats(self) -> CloudStats:
        return CloudStats(self._fill_count, self._qty_sell, self._qty_buy,
                          self._ws_sell, self._ws_buy,
                          self._min_fill, self._max_fill)

    def gravity(self) -> RationalPrice | None:
        if self._fill_count == 0:
            return None
        return Fraction(self._ws_sell + self._ws_buy,
                        self._qty_sell + self._qty_buy)

    def _gravity_pair(self) -> tuple[int, int]:
        return self._ws_sell + self._ws_buy, self._qty_sell + self._qty_buy

    # -- phase bookkeeping ----------------------------------------------

    def check_phase_backstop(self, time: int) -> None:
        """Raise StrandedOrderError once the phase exceeds its tick budget."""
        elapsed = time - self.phase_start_time
        if elapsed > self.params.max_phase_ticks:
            raise StrandedOrderError(self.phase_index, elapsed, self.queue)

    def _roll_phase(self, time: int) -> None:
        self.last_phase_records = tuple(self._phase_records)
        self.last_phase_end_time = time
        self._phase_records = []
        self.phase_index += 1
        self.stage = 1
        self._stage1_remaining = self.params.stage1_fill_count
        self.delays_this_phase = 0
        self.phase_start_time = time

    # -- events ----------------------------------------------------------

    def on_base_fill(self, order_id: int, sign: int, quantity: int, time: int,
                     raw_price: int, base_fill_price: int) -> str:
        """Decide the overlay's action for one baseline fill.

        Returns MIRROR or FORCED when the overlay fills immediately at
        the same price as the baseline, ENQUEUE when the order is
        delayed.  FORCED marks candidates that passed the Bernoulli and
        tolerance tests but were blocked by the queue cap, the spacing
        filter, or the grid reachability guard.
        """
        self.check_phase_backstop(time)
        if self.stage == 1:
            self._cloud_add(sign, quantity, raw_price)
            self._stage1_remaining -= 1
            if self._stage1_remaining == 0:
                self.stage = 2
            return MIRROR

        delayed = self.delay_draw()
        num, den = self._gravity_pair()
        eligible = (delayed
                    and den > 0
                    and sign * (num - raw_price * den) > self.params.tau * den)
        if not eligible:
            self._cloud_add(sign, quantity, raw_price)
            return MIRROR

        blocked = len(self.queue) >= self.params.queue_cap
        if not blocked and self.params.min_distance > 0:
            blocked = any(
                sign * (e.delay_grid_price - raw_price) <= self.params.min_distance
                for e in self.queue)
        if not blocked:
            # Reachability guard: the frozen gain level must be strictly
            # inside the grid, otherwise the release price may not exist.
            if sign == SELL:
                blocked = self.grid_max * den <= num + self.params.gamma * den
            else:
                blocked = self.grid_min * den >= num - self.params.gamma * den
        if blocked:
            self._cloud_add(sign, quantity, raw_price)
            return FORCED

        delta_t = Fraction(sign * (raw_price * den - num), den) + self.params.tau
        if delta_t >= 0:
            raise InvariantViolation(
                CLAUSE_PER_ORDER_GAP,
                f"delta_T at delay must be < 0, got {delta_t}")
        trigger = (_sell_trigger(num, den, self.params.gamma) if sign == SELL
                   else _buy_trigger(num, den, self.params.gamma))
        self.queue.append(DelayQueueEntry(
            order_id=order_id, sign=sign, quantity=quantity, delay_time=time,
            base_fill_price=base_fill_price, delay_grid_price=raw_price,
            gravity_num=num, gravity_den=den, delta_T_at_delay=delta_t,
            frozen_trigger=trigger))
        if sign == SELL:
            if self.frozen_sell_min is None or trigger < self.frozen_sell_min:
                self.frozen_sell_min = trigger
        else:
            if self.frozen_buy_max is None or trigger > self.frozen_buy_max:
                self.frozen_buy_max = trigger
        self.delays_this_phase += 1
        return ENQUEUE

    def on_tick(self, time: int,
                raw_price: int) -> tuple[list[DelayedOrderRecord], bool]:
        """Scan the queue once in enqueue order and release every entry
        whose gain threshold is cleared at this tick's price.

        Released entries update the cloud immediately, so later entries
        in the same pass see the updated gravity center.  Returns the
        executed records and whether the phase ended at this tick.
        """
        self.check_phase_backstop(time)
        executed: list[DelayedOrderRecord] = []
        if self.queue:
            num_t, den_t = self._gravity_pair()
            remaining: list[DelayQueueEntry] = []
            gamma = self.params.gamma
            for entry in self.queue:
                sign = entry.sign
                if sign == SELL:
                    mn, md = rational_pair_max(num_t, den_t,
                                               entry.gravity_num, entry.gravity_den)
                else:
                    mn, md = rational_pair_min(num_t, den_t,
                                               entry.gravity_num, entry.gravity_den)
                margin = sign * (raw_price * md - mn) - gamma * md
                if margin > 0:
                    exec_price = raw_price - sign * self.half_spread
                    record = DelayedOrderRecord(
                        order_id=entry.order_id, sign=sign,
                        quantity=entry.quantity, delay_time=entry.delay_time,
                        base_fill_price=entry.base_fill_price,
                        execution_time=time, execution_price=exec_price,
                        delta_T_at_delay=entry.delta_T_at_delay,
                        delta_G_at_execution=Fraction(margin, md))
                    gap = record.gap
                    if gap <= self.params.gamma + self.params.tau:
                        raise InvariantViolation(
                            CLAUSE_PER_ORDER_GAP,
                            f"order {entry.order_id}: gap {gap} ticks does not "
                            f"exceed gamma + tau = "
                            f"{self.params.gamma + self.params.tau}")
                    self._cloud_add(sign, entry.quantity, raw_price)
                    num_t, den_t = self._gravity_pair()
                    self.records.append(record)
                    self._phase_records.append(record)
                    self.q_delayed_total += entry.quantity
                    self.gap_weighted_total += gap * entry.quantity
                    executed.append(record)
                else:
                    remaining.append(entry)
            if executed:
                self.queue = remaining
                self._refresh_frozen_bounds()

        phase_ended = False
        if self.delays_this_phase >= 1 and not self.queue:
            self._roll_phase(time)
            phase_ended = True
        return executed, phase_ended

    def _refresh_frozen_bounds(self) -> None:
        sell_min: int | None = None
        buy_max: int | None = None
        for e in self.queue:
            if e.sign == SELL:
                if sell_min is None or e.frozen_trigger < sell_min:
                    sell_min = e.frozen_trigger
            else:
                if buy_max is None or e.frozen_trigger > buy_max:
                    buy_max = e.frozen_trigger
        self.frozen_sell_min = sell_min
        self.frozen_buy_max = buy_max

    def may_release_at(self, price: int) -> bool:
        """False when no queued entry can possibly release at this price,
        by the frozen conservative levels; a True may still release nothing."""
        return ((self.frozen_sell_min is not None
                 and price >= self.frozen_sell_min)
                or (self.frozen_buy_max is not None
                    and price <= self.frozen_buy_max))

    # -- block-engine support ---------------------------------------------

    def current_release_bounds(self) -> tuple[int | None, int | None]:
        """Exact release levels for the current cloud state.

        Valid until the next cloud change (any overlay fill); used by the
        harness to locate the first possible release tick inside a
        fill-free price segment.
        """
        if not self.queue:
            return None, None
        num_t, den_t = self._gravity_pair()
        gamma = self.params.gamma
        sell_min: int | None = None
        buy_max: int | None = None
        for e in self.queue:
            if e.sign == SELL:
                mn, md = rational_pair_max(num_t, den_t, e.gravity_num, e.gravity_den)
                level = _sell_trigger(mn, md, gamma)
                sell_min = level if sell_min is None else min(sell_min, level)
            else:
                mn, md = rational_pair_min(num_t, den_t, e.gravity_num, e.gravity_den)
                level = _buy_trigger(mn, md, gamma)
                buy_max = level if buy_max is None else max(buy_max, level)
        return sell_min, buy_max


def phase_clause_failures(diff: Money, previous_diff: Money, report: PhaseReport,
                     telescoping: Money, multiplier: int,
                     params: DominanceParams) -> list[str]:
    """Shared end-of-phase clause evaluation; returns violated clause names."""
    failures = []
    if diff != report.pnl_diff or diff != telescoping:
        failures.append(CLAUSE_PHASE_IDENTITY)
    expected_bound = multiplier * report.delayed_quantity * (params.gamma + params.tau)
    if report.lower_bound != expected_bound or diff < expected_bound:
        failures.append(CLAUSE_LOWER_BOUND)
    if report.delayed_quantity >= 1 and diff <= 0:
        failures.append(CLAUSE_POSITIVITY)
    if diff < previous_diff or (report.n_delayed >= 1 and diff <= previous_diff):
        failures.append(CLAUSE_MONOTONICITY)
    return failures


def phase_pnl_diff_check(report: PhaseReport, previous_diff: Money,
                         cumulative_records: Iterable[DelayedOrderRecord],
                         orders_s: Sequence[Order], orders_sstar: Sequence[Order],
                         price: int, instrument: Instrument,
                         params: DominanceParams) -> list[str]:
    """Re-derive the end-of-phase obligations from full order histories.

    Recomputes the PnL difference with the accounting module (independent
    of the engine's bookkeeping) and checks: exact equality with the
    delayed-order telescoping sum, the lower bound
    multiplier * Q_D * (gamma + tau), strict positivity once anything was
    delayed, and monotonicity against the previous phase end.  Returns
    the violated clause names (empty means the phase passes).
    """
    diff = (pnl_direct(orders_sstar, price, instrument)
            - pnl_direct(orders_s, price, instrument))
    telescoping = instrument.multiplier * sum(
        r.sign * (r.execution_price - r.base_fill_price) * r.quantity
        for r in cumulative_records)
    return phase_clause_failures(diff, previous_diff, report, telescoping,
                            instrument.multiplier, params)
