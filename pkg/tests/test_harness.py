from dataclasses import replace
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest

from edgesim.accounting import pnl_direct
from edgesim.dominance import DominanceParams, StrandedOrderError
from edgesim.harness import (RunConfig, RunSettings, default_config,
                             replication_seed, run_simulation, sweep)
from edgesim.market import Instrument
from edgesim.prices import (MEAN_REVERTING_WALK, REFLECTING_WALK,
                            PriceProcessConfig)
from edgesim.strategies import BaselineConfig


def quick(seed=11, phases=2, **run_overrides):
    """A narrow-grid profile whose phases finish in a few thousand ticks,
    fast enough for the literal scalar engine."""
    instrument = Instrument("T", 1, Decimal("0.01"), 9800, 10200)
    price = PriceProcessConfig(kind=REFLECTING_WALK, grid_min=9800,
                               grid_max=10200, start_price=10000,
                               stay_probability=Fraction(1, 2))
    strategy = BaselineConfig(order_probability=Fraction(1, 20))
    dominance = DominanceParams(tau=10, gamma=10, queue_cap=3,
                                stage1_fill_count=3)
    run = RunSettings(**{"target_phases": phases, "master_seed": seed,
                         "keep_orders": True, **run_overrides})
    return RunConfig(instrument, price, strategy, dominance, run)


def assert_reports_equal(a, b):
    assert a.final_time == b.final_time
    assert a.final_price == b.final_price
    assert a.final_diff == b.final_diff
    assert a.phases == b.phases
    assert a.records == b.records
    assert a.orders_s == b.orders_s
    assert a.orders_sstar == b.orders_sstar
    if a.ticks is None or b.ticks is None:
        assert a.ticks is None and b.ticks is None
    else:
        for name in ("time", "price", "pnl_s", "pnl_sstar", "diff"):
            assert np.array_equal(getattr(a.ticks, name), getattr(b.ticks, name))


def test_run_settings_validation():
    with pytest.raises(ValueError):
        RunSettings(total_ticks=100, target_phases=5)
    with pytest.raises(ValueError):
        RunSettings(total_ticks=None, target_phases=None)
    with pytest.raises(ValueError):
        RunSettings(target_phases=5, half_spread=-1)


def test_grid_mismatch_rejected():
    cfg = default_config()
    with pytest.raises(ValueError):
        RunConfig(cfg.instrument,
                  PriceProcessConfig(grid_min=0, grid_max=2000,
                                     start_price=1000),
                  cfg.strategy, cfg.dominance, cfg.run)


def test_same_seed_same_report():
    cfg = quick(seed=21)
    assert_reports_equal(run_simulation(cfg), run_simulation(cfg))


@pytest.mark.parametrize("seed", [5, 92, 777])
def test_scalar_and_blocked_engines_agree(seed):
    cfg = quick(seed=seed, phases=3)
    assert_reports_equal(run_simulation(cfg, engine="scalar"),
                         run_simulation(cfg, engine="blocked"))


def test_engines_agree_with_spread_and_alternator():
    cfg = quick(seed=31, half_spread=2)
    cfg = replace(cfg, strategy=BaselineConfig(kind="periodic_alternator",
                                               period=15, quantity=2))
    assert_reports_equal(run_simulation(cfg, engine="scalar"),
                         run_simulation(cfg, engine="blocked"))


def test_engines_agree_on_default_profile():
    cfg = default_config(master_seed=92, target_phases=1, keep_orders=True)
    assert_reports_equal(run_simulation(cfg, engine="scalar"),
                         run_simulation(cfg, engine="blocked"))


def test_per_tick_audit_passes():
    run_simulation(quick(seed=11, phases=3), engine="scalar",
                   per_tick_audit=True)


def test_report_diff_matches_accounting_oracle():
    cfg = quick(seed=13)
    rep = run_simulation(cfg)
    inst = cfg.instrument
    for phase in rep.phases:
        t = phase.end_time
        s_hist = [o for o in rep.orders_s if o.time <= t]
        star_hist = [o for o in rep.orders_sstar if o.time <= t]
        price = int(rep.ticks.price[t])
        diff = (pnl_direct(star_hist, price, inst)
                - pnl_direct(s_hist, price, inst))
        assert diff == phase.pnl_diff


def test_positions_match_at_phase_ends():
    cfg = quick(seed=17)
    rep = run_simulation(cfg)
    assert rep.phases
    for phase in rep.phases:
        t = phase.end_time
        pos_s = -sum(o.sign * o.quantity for o in rep.orders_s if o.time <= t)
        pos_star = -sum(o.sign * o.quantity
                        for o in rep.orders_sstar if o.time <= t)
        assert pos_s == pos_star


def test_diff_moves_only_while_positions_differ():
    cfg = quick(seed=19)
    rep = run_simulation(cfg)
    diff = rep.ticks.diff
    pending = np.zeros(rep.final_time + 2, dtype=bool)
    for r in rep.records:
        pending[r.delay_time:r.execution_time] = True
    exec_ticks = {r.execution_time for r in rep.records}
    changed = np.flatnonzero(np.diff(diff)) + 1
    for t in changed:
        assert pending[t - 1] or pending[t] or int(t) in exec_ticks
    assert len(changed) > 0


def test_degenerate_delay_keeps_diff_zero():
    cfg = default_config(master_seed=23, total_ticks=40_000,
                         target_phases=None, disable_delays=True)
    rep = run_simulation(cfg)
    assert np.all(rep.ticks.diff == 0)
    assert rep.q_delayed_total == 0
    assert rep.phases == []


def test_expense_independence_of_phase_diffs():
    base = dict(seed=29, phases=3, record_ticks=False, keep_orders=False)
    r0 = run_simulation(quick(**base))
    r1 = run_simulation(quick(**base, commission_per_unit=250, half_spread=2))
    assert [p.pnl_diff for p in r0.phases] == [p.pnl_diff for p in r1.phases]
    assert [p.end_time for p in r0.phases] == [p.end_time for p in r1.phases]
    assert r0.commissions_s == 0
    assert r1.commissions_s > 0
    assert r1.commissions_s == r1.commissions_sstar


def test_stranded_backstop_aborts_run():
    cfg = quick(seed=11, phases=5)
    cfg = replace(cfg, dominance=replace(cfg.dominance, max_phase_ticks=200))
    with pytest.raises(StrandedOrderError):
        run_simulation(cfg)


def test_mean_reverting_price_process_runs():
    cfg = default_config(master_seed=37, total_ticks=20_000, target_phases=None)
    cfg = replace(cfg, price=replace(cfg.price, kind=MEAN_REVERTING_WALK,
                                     reversion_strength=Fraction(1, 4)))
    rep = run_simulation(cfg)
    assert rep.final_time == 20_000
    assert rep.ticks.price.min() >= 9000
    assert rep.ticks.price.max() <= 11000


def test_total_ticks_mode_stops_exactly():
    cfg = default_config(master_seed=41, total_ticks=12_345, target_phases=None)
    rep = run_simulation(cfg)
    assert rep.final_time == 12_345
    assert len(rep.ticks.time) == 12_346
    assert rep.stop_reason == "total_ticks"
    assert rep.drawdown_exact
    assert rep.max_drawdown_s >= 0


def test_replication_seeds():
    assert replication_seed(7, 0) == 7
    assert len({replication_seed(7, r) for r in range(5)}) == 5


# -- sweep -----------------------------------------------------------------------

def test_sweep_single_cell_matches_run():
    cfg = quick(seed=43, record_ticks=False, keep_orders=False)
    rows = sweep(cfg, {"tau": [10]})
    rep = run_simulation(replace(cfg, run=replace(cfg.run, record_ticks=False)))
    assert len(rows) == 1
    row = rows[0]
    assert row.status == "ok"
    assert row.final_diff == rep.final_diff
    assert row.phases_completed == rep.phases_completed
    assert row.q_delayed == rep.q_delayed_total


def test_sweep_skips_invalid_cells():
    cfg = quick(seed=43, phases=1, record_ticks=False)
    rows = sweep(cfg, {"tau": [10, 5000]})
    by_tau = {row.cell["tau"]: row for row in rows}
    assert by_tau[10].status == "ok"
    assert by_tau[5000].status == "skipped"
    assert "half the grid width" in by_tau[5000].note


def test_sweep_mean_gap_exceeds_threshold_per_cell():
    cfg = quick(seed=47, record_ticks=False)
    rows = sweep(cfg, {"tau": [5, 10], "gamma": [10]})
    for row in rows:
        assert row.status == "ok"
        assert row.mean_gap > row.cell["tau"] + row.cell["gamma"]


def test_sweep_rejects_unknown_parameter():
    with pytest.raises(ValueError):
        sweep(quick(), {"stage1_fill_count": [1]})
