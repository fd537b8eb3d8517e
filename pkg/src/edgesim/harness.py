"""Deterministic run orchestration: baseline and overlay side by side.

A run advances one price process tick by tick, feeds each tick to the
baseline strategy (whose intents fill at the next tick's side-adjusted
price) and to the dominance engine, computes both strategies' PnL
exactly, and checks every end-of-phase proof obligation as it happens.
Any violated clause aborts the run with InvariantViolation; a completed
RunReport therefore certifies that every check passed.

Two execution engines produce bit-identical results:

  * scalar: one literal next_price/on_tick step per tick; the reference.
  * blocked: prices, intents and release scans are processed in
    vectorized blocks; the engine is only invoked at ticks where a fill
    or a queue release can occur.  Between overlay fills the gravity
    center is constant, so queue releases are exactly the crossings of
    precomputed integer price levels; this is what makes desk-scale
    acceptance runs fast.

Randomness is consumed from four documented substreams of the master
seed (price steps, baseline intents, baseline sides, delay draws); see
edgesim.prices.substream.  All run state is integer; seeds plus config
determine every output byte.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .dominance import (CLAUSE_LOWER_BOUND, CLAUSE_MONOTONICITY,
                        CLAUSE_PER_ORDER_GAP, CLAUSE_PHASE_IDENTITY,
                        CLAUSE_POSITION_MATCH, CLAUSE_POSITIVITY,
                        CLAUSE_QUEUE_CAP, ENQUEUE, DelayedOrderRecord,
                        DominanceEngine, DominanceParams, InvariantViolation,
                        PhaseReport, phase_clause_failures, phase_pnl_diff_check)
from .market import Instrument, Money, Order, side_sign
from .prices import (REFLECTING_WALK, STREAM_DELAY, STREAM_PRICE,
                     PriceProcessConfig, PricePathState, next_price,
                     substream, walk_block)
from .strategies import (BaselineConfig, BaselineStreams, baseline_on_tick,
                         baseline_streams, intent_block)

_BLOCK = 8192
_DELAY_BUFFER = 4096


@dataclass(frozen=True)
class RunSettings:
    total_ticks: int | None = None
    target_phases: int | None = 20
    master_seed: int = 1
    half_spread: int = 0
    commission_per_unit: Money = 0
    replications: int = 1
    record_ticks: bool = True
    keep_orders: bool = False
    disable_delays: bool = False
    out_dir: str | None = None

    def __post_init__(self) -> None:
        if (self.total_ticks is None) == (self.target_phases is None):
            raise ValueError("exactly one of total_ticks/target_phases must be set")
        if self.total_ticks is not None and self.total_ticks < 1:
            raise ValueError("total_ticks must be >= 1")
        if self.target_phases is not None and self.target_phases < 1:
            raise ValueError("target_phases must be >= 1")
        if self.half_spread < 0:
            raise ValueError("half_spread must be >= 0")
        if self.commission_per_unit < 0:
            raise ValueError("commission_per_unit must be >= 0")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    instrument: Instrument
    price: PriceProcessConfig
    strategy: BaselineConfig
    dominance: DominanceParams
    run: RunSettings

    def __post_init__(self) -> None:
        if (self.instrument.grid_min != self.price.grid_min
                or self.instrument.grid_max != self.price.grid_max):
            raise ValueError("instrument and price process grids must agree")
        self.dominance.validate_for_grid(self.price.grid_min, self.price.grid_max)


def default_config(**run_overrides) -> RunConfig:
    """The desk-scale profile: cent ticks on a 90.00-110.00 grid, lazy
    reflecting walk, sparse unit-lot bernoulli baseline, tau = gamma = 25."""
    from decimal import Decimal
    instrument = Instrument(symbol="SIM", multiplier=1,
                            tick_size=Decimal("0.01"),
                            grid_min=9000, grid_max=11000)
    price = PriceProcessConfig(kind=REFLECTING_WALK, grid_min=9000,
                               grid_max=11000, start_price=10000,
                               stay_probability=Fraction(1, 2))
    strategy = BaselineConfig(kind="bernoulli_trader",
                              order_probability=Fraction(1, 50), quantity=1)
    dominance = DominanceParams(tau=25, gamma=25,
                                delay_probability=Fraction(1, 2),
                                queue_cap=3, stage1_fill_count=5)
    run = RunSettings(**{"target_phases": 20, "master_seed": 1, **run_overrides})
    return RunConfig(instrument, price, strategy, dominance, run)


@dataclass
class TickSeries:
    """Per-tick outputs: one row per tick, t = 0 .. final."""
    time: np.ndarray
    price: np.ndarray
    pnl_s: np.ndarray
    pnl_sstar: np.ndarray
    diff: np.ndarray

    def __len__(self) -> int:
        return len(self.time)


@dataclass
class RunReport:
    config: RunConfig
    master_seed: int
    final_time: int
    final_price: int
    final_diff: Money
    phases: list[PhaseReport]
    records: list[DelayedOrderRecord]
    q_delayed_total: int
    max_drawdown_s: Money | None
    max_drawdown_sstar: Money | None
    drawdown_exact: bool
    commissions_s: Money
    commissions_sstar: Money
    stop_reason: str
    verdicts: list[dict]
    ticks: TickSeries | None = None
    orders_s: list[Order] | None = None
    orders_sstar: list[Order] | None = None

    @property
    def phases_completed(self) -> int:
        return len(self.phases)

    @property
    def mean_order_gap(self) -> Fraction | None:
        if not self.records:
            return None
        return Fraction(sum(r.gap for r in self.records), len(self.records))


class _BufferedBernoulli:
    """Buffered uniform draws against a fixed probability; one draw per call."""

    def __init__(self, rng: np.random.Generator, probability: Fraction):
        self._rng = rng
        self._p = float(probability)
        self._buf = np.empty(0)
        self._idx = 0

    def __call__(self) -> bool:
        if self._idx >= len(self._buf):
            self._buf = self._rng.random(_DELAY_BUFFER)
            self._idx = 0
        u = self._buf[self._idx]
        self._idx += 1
        return bool(u < self._p)


def _never_delay() -> bool:
    return False


class _RunState:
    """Mutable per-run accounting shared by both execution engines."""

    def __init__(self, config: RunConfig, seed: int):
        self.config = config
        self.instrument = config.instrument
        self.m = config.instrument.multiplier
        self.half_spread = config.run.half_spread
        self.keep_orders = config.run.keep_orders
        self.record_ticks = config.run.record_ticks

        delay_draw = (_never_delay if config.run.disable_delays
                      else _BufferedBernoulli(substream(seed, STREAM_DELAY),
                                              config.dominance.delay_probability))
        self.engine = DominanceEngine(config.dominance, config.price.grid_min,
                                      config.price.grid_max, self.half_spread,
                                      delay_draw)
        self.streams: BaselineStreams = baseline_streams(seed)

        # Running integer aggregates: W = sum sign*price*qty, SQ = sum sign*qty.
        self.w_s = 0
        self.sq_s = 0
        self.w_star = 0
        self.sq_star = 0
        self.qty_s = 0
        self.qty_star = 0
        self.order_count = 0
        self.orders_s: list[Order] | None = [] if self.keep_orders else None
        self.orders_star: list[Order] | None = [] if self.keep_orders else None

        self.phases: list[PhaseReport] = []
        self.prev_diff: Money = 0
        self.pending_intent: tuple[int, int] | None = None   # (sign, quantity)

        # Tick series buffers (numpy chunks, concatenated at the end).
        self._chunks: list[tuple[np.ndarray, np.ndarray, np.ndarray,
                                 np.ndarray, np.ndarray]] = []

    # -- PnL ------------------------------------------------------------

    def pnl_s(self, price: int) -> Money:
        return self.m * (self.w_s - price * self.sq_s)

    def pnl_star(self, price: int) -> Money:
        return self.m * (self.w_star - price * self.sq_star)

    def diff(self, price: int) -> Money:
        return self.m * ((self.w_star - self.w_s) - price * (self.sq_star - self.sq_s))

    # -- events -----------------------------------------------------------

    def base_fill(self, time: int, raw_price: int, sign: int, quantity: int) -> None:
        self.order_count += 1
        fill = raw_price - sign * self.half_spread
        self.w_s += sign * fill * quantity
        self.sq_s += sign * quantity
        self.qty_s += quantity
        if self.orders_s is not None:
            self.orders_s.append(Order(self.order_count, time, sign, fill, quantity))
        action = self.engine.on_base_fill(self.order_count, sign, quantity,
                                          time, raw_price, fill)
        if action != ENQUEUE:
            self.w_star += sign * fill * quantity
            self.sq_star += sign * quantity
            self.qty_star += quantity
            if self.orders_star is not None:
                self.orders_star.append(
                    Order(self.order_count, time, sign, fill, quantity))

    def apply_executions(self, records: Sequence[DelayedOrderRecord]) -> None:
        for r in records:
            self.w_star += r.sign * r.execution_price * r.quantity
            self.sq_star += r.sign * r.quantity
            self.qty_star += r.quantity
            if self.orders_star is not None:
                self.orders_star.append(Order(r.order_id, r.execution_time,
                                              r.sign, r.execution_price,
                                              r.quantity))

    def end_phase(self, time: int, price: int) -> None:
        if self.sq_star != self.sq_s:
            raise InvariantViolation(
                CLAUSE_POSITION_MATCH,
                f"open positions differ at phase end t={time}: "
                f"{-self.sq_star} vs {-self.sq_s}")
        engine = self.engine
        diff = self.diff(price)
        params = self.config.dominance
        report = PhaseReport(
            phase_index=engine.phase_index - 1,
            end_time=time,
            delayed_quantity=engine.q_delayed_total,
            pnl_diff=diff,
            lower_bound=self.m * engine.q_delayed_total * (params.gamma + params.tau),
            records=engine.last_phase_records)
        telescoping = self.m * engine.gap_weighted_total
        failures = phase_clause_failures(diff, self.prev_diff, report, telescoping,
                                    self.m, params)
        if not failures and self.orders_s is not None:
            failures = phase_pnl_diff_check(report, self.prev_diff,
                                            engine.records, self.orders_s,
                                            self.orders_star, price,
                                            self.instrument, params)
        if failures:
            raise InvariantViolation(
                failures[0], f"phase {report.phase_index} ended at t={time} "
                             f"with diff={diff}, bound={report.lower_bound}, "
                             f"previous diff={self.prev_diff}")
        self.phases.append(report)
        self.prev_diff = diff

    def audit_tick(self, price: int) -> None:
        """Mid-phase reconciliation: the diff equals the telescoping sum of
        executed delays plus the open-position discrepancy of queued ones."""
        pend = sum(e.sign * (price - e.base_fill_price) * e.quantity
                   for e in self.engine.queue)
        expected = self.m * (self.engine.gap_weighted_total + pend)
        got = self.diff(price)
        if got != expected:
            raise InvariantViolation(
                CLAUSE_PHASE_IDENTITY,
                f"mid-phase diff {got} != telescoping + pending {expected}")

    # -- tick rows ----------------------------------------------------------

    def emit_initial_row(self, price: int) -> None:
        if self.record_ticks:
            z = np.zeros(1, dtype=np.int64)
            self._chunks.append((z.copy(), np.full(1, price, dtype=np.int64),
                                 z.copy(), z.copy(), z.copy()))

    def emit_rows(self, prices: np.ndarray, start_time: int, lo: int, hi: int) -> None:
        """Rows for block offsets [lo, hi) under the current aggregates."""
        if hi <= lo or not self.record_ticks:
            return
        seg = prices[lo:hi]
        times = np.arange(start_time + lo, start_time + hi, dtype=np.int64)
        pnl_s = self.m * (self.w_s - seg * self.sq_s)
        pnl_star = self.m * (self.w_star - seg * self.sq_star)
        self._chunks.append((times, seg.astype(np.int64),
                             pnl_s, pnl_star, pnl_star - pnl_s))

    def emit_row(self, price: int, time: int) -> None:
        if not self.record_ticks:
            return
        times = np.array([time], dtype=np.int64)
        prices = np.array([price], dtype=np.int64)
        ps = np.array([self.pnl_s(price)], dtype=np.int64)
        pst = np.array([self.pnl_star(price)], dtype=np.int64)
        self._chunks.append((times, prices, ps, pst, pst - ps))

    def tick_series(self) -> TickSeries | None:
        if not self.record_ticks:
            return None
        cols = [np.concatenate(c) for c in zip(*self._chunks)]
        return TickSeries(*cols)

    # -- report --------------------------------------------------------------

    def build_report(self, seed: int, final_time: int, final_price: int,
                     stop_reason: str) -> RunReport:
        series = self.tick_series()
        if series is not None:
            dd_s = _max_drawdown(series.pnl_s)
            dd_star = _max_drawdown(series.pnl_sstar)
            exact = True
        else:
            # Drawdowns need the per-tick series; not computed otherwise.
            dd_s, dd_star = None, None
            exact = False
        engine = self.engine
        verdicts = [
            {"clause": CLAUSE_PER_ORDER_GAP, "passed": True,
             "checked": len(engine.records)},
            {"clause": CLAUSE_PHASE_IDENTITY, "passed": True,
             "checked": len(self.phases)},
            {"clause": CLAUSE_LOWER_BOUND, "passed": True,
             "checked": len(self.phases)},
            {"clause": CLAUSE_POSITIVITY, "passed": True,
             "checked": len(self.phases)},
            {"clause": CLAUSE_MONOTONICITY, "passed": True,
             "checked": len(self.phases)},
            {"clause": CLAUSE_POSITION_MATCH, "passed": True,
             "checked": len(self.phases)},
            {"clause": CLAUSE_QUEUE_CAP, "passed": True,
             "checked": len(engine.records)},
        ]
        return RunReport(
            config=self.config, master_seed=seed,
            final_time=final_time, final_price=final_price,
            final_diff=self.diff(final_price),
            phases=self.phases, records=list(engine.records),
            q_delayed_total=engine.q_delayed_total,
            max_drawdown_s=dd_s, max_drawdown_sstar=dd_star,
            drawdown_exact=exact,
            commissions_s=self.config.run.commission_per_unit * self.qty_s,
            commissions_sstar=self.config.run.commission_per_unit * self.qty_star,
            stop_reason=stop_reason, verdicts=verdicts,
            ticks=series, orders_s=self.orders_s, orders_sstar=self.orders_star)


def _max_drawdown(pnl: np.ndarray) -> Money:
    if len(pnl) == 0:
        return 0
    peaks = np.maximum.accumulate(pnl)
    return int((peaks - pnl).max())


def _stop_on_phase(config: RunConfig, state: _RunState) -> bool:
    target = config.run.target_phases
    return target is not None and len(state.phases) >= target


def run_simulation(config: RunConfig, master_seed: int | None = None,
                   engine: str = "auto", per_tick_audit: bool = False) -> RunReport:
    """Run one replication to its stopping condition and return the report.

    engine: "scalar" steps literally tick by tick, "blocked" vectorizes
    event-free stretches, "auto" picks blocked for the reflecting walk.
    Both produce identical reports for identical seeds.  per_tick_audit
    additionally re-checks the PnL-difference reconciliation at every
    tick (scalar engine only; slow, meant for tests).
    """
    seed = config.run.master_seed if master_seed is None else master_seed
    if engine == "auto":
        engine = ("blocked" if config.price.kind == REFLECTING_WALK
                  and not per_tick_audit else "scalar")
    if engine not in ("scalar", "blocked"):
        raise ValueError(f"unknown engine {engine!r}")
    if per_tick_audit and engine != "scalar":
        raise ValueError("per_tick_audit requires the scalar engine")

    state = _RunState(config, seed)
    if engine == "scalar":
        final_time, final_price, reason = _run_scalar(config, state, seed,
                                                      per_tick_audit)
    else:
        final_time, final_price, reason = _run_blocked(config, state, seed)
    return state.build_report(seed, final_time, final_price, reason)


def _run_scalar(config: RunConfig, state: _RunState, seed: int,
                per_tick_audit: bool) -> tuple[int, int, str]:
    pcfg = config.price
    scfg = config.strategy
    ps = PricePathState(pcfg.start_price, 0, substream(seed, STREAM_PRICE))
    state.emit_initial_row(ps.current_price)
    total = config.run.total_ticks

    while True:
        ps = next_price(ps, pcfg)
        t, price = ps.time, ps.current_price
        if state.pending_intent is not None:
            sign, qty = state.pending_intent
            state.pending_intent = None
            state.base_fill(t, price, sign, qty)
        intent = baseline_on_tick(scfg, price, t, state.streams)
        if intent is not None:
            state.pending_intent = (side_sign(intent.side), intent.quantity)
        records, phase_ended = state.engine.on_tick(t, price)
        if records:
            state.apply_executions(records)
        if per_tick_audit:
            state.audit_tick(price)
        state.emit_row(price, t)
        if phase_ended:
            state.end_phase(t, price)
            if _stop_on_phase(config, state):
                return t, price, "target_phases"
        if total is not None and t >= total:
            return t, price, "total_ticks"


def _run_blocked(config: RunConfig, state: _RunState, seed: int) -> tuple[int, int, str]:
    pcfg = config.price
    scfg = config.strategy
    rng = substream(seed, STREAM_PRICE)
    engine = state.engine
    t = 0
    price = pcfg.start_price
    state.emit_initial_row(price)
    total = config.run.total_ticks

    while True:
        n = _BLOCK if total is None else min(_BLOCK, total - t)
        prices = walk_block(price, rng, n, pcfg)
        offsets, sides = intent_block(scfg, t + 1, n, state.streams)

        # Intents fill one tick later; the last tick's intent carries over.
        fills: list[tuple[int, int, int]] = []
        if state.pending_intent is not None:
            sign, qty = state.pending_intent
            fills.append((0, sign, qty))
            state.pending_intent = None
        for k, off in enumerate(offsets):
            sign = side_sign(sides[k])
            if off + 1 < n:
                fills.append((int(off) + 1, sign, scfg.quantity))
            else:
                state.pending_intent = (sign, scfg.quantity)

        block_max = int(prices.max())
        block_min = int(prices.min())

        pos = 0
        fill_idx = 0
        while pos < n:
            next_fill = fills[fill_idx][0] if fill_idx < len(fills) else n

            # Release search inside the fill-free stretch.  The frozen
            # bounds skip provably release-free blocks; within candidate
            # blocks the exact per-queue levels locate the crossing tick.
            if (engine.queue and pos < next_fill
                    and ((engine.frozen_sell_min is not None
                          and block_max >= engine.frozen_sell_min)
                         or (engine.frozen_buy_max is not None
                             and block_min <= engine.frozen_buy_max))):
                sell_min, buy_max = engine.current_release_bounds()
                seg = prices[pos:next_fill]
                mask = None
                if sell_min is not None:
                    mask = seg >= sell_min
                if buy_max is not None:
                    low = seg <= buy_max
                    mask = low if mask is None else (mask | low)
                if mask is not None and mask.any():
                    e = pos + int(np.argmax(mask))
                    state.emit_rows(prices, t + 1, pos, e)
                    tick = t + 1 + e
                    price_e = int(prices[e])
                    records, phase_ended = engine.on_tick(tick, price_e)
                    state.apply_executions(records)
                    state.emit_row(price_e, tick)
                    if phase_ended:
                        state.end_phase(tick, price_e)
                        if _stop_on_phase(config, state):
                            return tick, price_e, "target_phases"
                    pos = e + 1
                    continue

            state.emit_rows(prices, t + 1, pos, next_fill)
            if fill_idx < len(fills):
                f = next_fill
                tick = t + 1 + f
                price_f = int(prices[f])
                _, sign, qty = fills[fill_idx]
                state.base_fill(tick, price_f, sign, qty)
                if engine.queue and engine.may_release_at(price_f):
                    records, phase_ended = engine.on_tick(tick, price_f)
                    state.apply_executions(records)
                else:
                    phase_ended = False
                state.emit_row(price_f, tick)
                if phase_ended:
                    state.end_phase(tick, price_f)
                    if _stop_on_phase(config, state):
                        return tick, price_f, "target_phases"
                pos = f + 1
                fill_idx += 1
            else:
                pos = n

        t += n
        price = int(prices[-1])
        engine.check_phase_backstop(t)
        if total is not None and t >= total:
            return t, price, "total_ticks"


def replication_seed(master_seed: int, replication: int) -> int:
    """Seed for the k-th replication; replication 0 is the master seed."""
    if replication == 0:
        return master_seed
    return master_seed + replication


def run_replications(config: RunConfig) -> list[RunReport]:
    return [run_simulation(config, master_seed=replication_seed(
        config.run.master_seed, r)) for r in range(config.run.replications)]


# -- parameter sweeps ---------------------------------------------------------

_SWEEPABLE = ("tau", "gamma", "delay_probability", "queue_cap")


@dataclass(frozen=True)
class SweepRow:
    cell: dict
    replication: int
    seed: int
    status: str                  # "ok" or "skipped"
    note: str = ""
    final_diff: Money = 0
    phases_completed: int = 0
    q_delayed: int = 0
    n_delayed: int = 0
    mean_gap: Fraction | None = None


def sweep(config: RunConfig, grid: Mapping[str, Sequence]) -> list[SweepRow]:
    """One run per grid cell per replication, deterministic seeds per cell.

    Cells that fail parameter validation are marked skipped, not fatal.
    Replication seeds are shared across cells so cells are paired.
    """
    for key in grid:
        if key not in _SWEEPABLE:
            raise ValueError(f"cannot sweep over {key!r}; "
                             f"sweepable: {', '.join(_SWEEPABLE)}")
    keys = list(grid)
    rows: list[SweepRow] = []
    for values in itertools.product(*(grid[k] for k in keys)):
        cell = dict(zip(keys, values))
        for rep in range(config.run.replications):
            seed = replication_seed(config.run.master_seed, rep)
            try:
                dom = replace(config.dominance, **cell)
                cell_config = RunConfig(config.instrument, config.price,
                                        config.strategy, dom,
                                        replace(config.run, record_ticks=False))
            except ValueError as exc:
                rows.append(SweepRow(cell=cell, replication=rep, seed=seed,
                                     status="skipped", note=str(exc)))
                continue
            report = run_simulation(cell_config, master_seed=seed)
            rows.append(SweepRow(
                cell=cell, replication=rep, seed=seed, status="ok",
                final_diff=report.final_diff,
                phases_completed=report.phases_completed,
                q_delayed=report.q_delayed_total,
                n_delayed=len(report.records),
                mean_gap=report.mean_order_gap))
    return rows
