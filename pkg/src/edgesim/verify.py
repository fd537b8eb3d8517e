"""Offline re-audit of a completed run from its artifacts alone.

verify_run re-derives every provable clause from phases.csv,
delayed_orders.csv, summary.json and (when present) ticks.csv, without
trusting any in-run bookkeeping.  Each clause yields one verdict; a
violation names the first offending phase index or order id.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .dominance import (CLAUSE_LOWER_BOUND, CLAUSE_MONOTONICITY,
                        CLAUSE_PER_ORDER_GAP, CLAUSE_PHASE_IDENTITY,
                        CLAUSE_POSITIVITY, CLAUSE_QUEUE_CAP,
                        CLAUSE_TICK_CONSISTENCY)
from .runio import read_delayed, read_phases, read_summary, read_ticks


@dataclass(frozen=True)
class Verdict:
    clause: str
    passed: bool
    detail: str = ""

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        tail = f": {self.detail}" if self.detail else ""
        return f"{status}  {self.clause}{tail}"


def _check_per_order_gap(records: list[dict], gamma: int, tau: int) -> Verdict:
    threshold = gamma + tau
    for r in records:
        gap = r["sign"] * (r["p_exec_ticks"] - r["p_delay_ticks"])
        if gap != r["gap_ticks"]:
            return Verdict(CLAUSE_PER_ORDER_GAP, False,
                           f"order {r['order_id']}: recorded gap "
                           f"{r['gap_ticks']} != sign*(p_exec-p_delay) = {gap}")
        if gap <= threshold:
            return Verdict(CLAUSE_PER_ORDER_GAP, False,
                           f"order {r['order_id']}: gap {gap} ticks does not "
                           f"exceed gamma + tau = {threshold}")
    return Verdict(CLAUSE_PER_ORDER_GAP, True, f"{len(records)} orders")


def _check_phase_identity(phases: list[dict], records: list[dict],
                          multiplier: int) -> Verdict:
    events = sorted(records, key=lambda r: (r["t_exec"], r["order_id"]))
    idx = 0
    telescoping = 0
    for p in phases:
        while idx < len(events) and events[idx]["t_exec"] <= p["end_time"]:
            r = events[idx]
            telescoping += r["gap_ticks"] * r["qty"]
            idx += 1
        if p["diff_quanta"] != multiplier * telescoping:
            return Verdict(CLAUSE_PHASE_IDENTITY, False,
                           f"phase {p['phase']}: diff {p['diff_quanta']} != "
                           f"telescoping sum {multiplier * telescoping}")
    if idx != len(events):
        return Verdict(CLAUSE_PHASE_IDENTITY, False,
                       f"{len(events) - idx} delayed orders executed after "
                       f"the last phase end")
    return Verdict(CLAUSE_PHASE_IDENTITY, True, f"{len(phases)} phases")


def _check_lower_bound(phases: list[dict], multiplier: int, gamma: int,
                       tau: int) -> Verdict:
    for p in phases:
        expected = multiplier * p["q_delayed"] * (gamma + tau)
        if p["lower_bound_quanta"] != expected:
            return Verdict(CLAUSE_LOWER_BOUND, False,
                           f"phase {p['phase']}: recorded bound "
                           f"{p['lower_bound_quanta']} != m*Q_D*(gamma+tau) "
                           f"= {expected}")
        if p["diff_quanta"] < expected:
            return Verdict(CLAUSE_LOWER_BOUND, False,
                           f"phase {p['phase']}: diff {p['diff_quanta']} "
                           f"below bound {expected}")
    return Verdict(CLAUSE_LOWER_BOUND, True, f"{len(phases)} phases")


def _check_positivity(phases: list[dict]) -> Verdict:
    for p in phases:
        if p["q_delayed"] >= 1 and p["diff_quanta"] <= 0:
            return Verdict(CLAUSE_POSITIVITY, False,
                           f"phase {p['phase']}: diff {p['diff_quanta']} "
                           f"not strictly positive with Q_D = {p['q_delayed']}")
    return Verdict(CLAUSE_POSITIVITY, True, f"{len(phases)} phases")


def _check_monotonicity(phases: list[dict]) -> Verdict:
    prev = 0
    for p in phases:
        if p["diff_quanta"] < prev:
            return Verdict(CLAUSE_MONOTONICITY, False,
                           f"phase {p['phase']}: diff {p['diff_quanta']} "
                           f"decreased from {prev}")
        if p["n_delayed"] >= 1 and p["diff_quanta"] <= prev:
            return Verdict(CLAUSE_MONOTONICITY, False,
                           f"phase {p['phase']}: diff {p['diff_quanta']} not "
                           f"strictly above {prev} despite {p['n_delayed']} "
                           f"delayed orders")
        prev = p["diff_quanta"]
    return Verdict(CLAUSE_MONOTONICITY, True, f"{len(phases)} phases")


def _check_queue_cap(records: list[dict], cap: int) -> Verdict:
    # An entry occupies a slot from its delay tick through its execution
    # tick inclusive: a same-tick enqueue precedes the queue scan.
    events: list[tuple[int, int, int]] = []
    for r in records:
        events.append((r["t_delay"], 1, r["order_id"]))
        events.append((r["t_exec"] + 1, -1, r["order_id"]))
    events.sort()
    occupancy = 0
    for time, delta, order_id in events:
        occupancy += delta
        if occupancy > cap:
            return Verdict(CLAUSE_QUEUE_CAP, False,
                           f"at t={time} queue occupancy {occupancy} exceeds "
                           f"cap {cap} (order {order_id})")
    return Verdict(CLAUSE_QUEUE_CAP, True, f"{len(records)} orders")


def _check_tick_consistency(run_dir: Path, phases: list[dict]) -> Verdict | None:
    ticks = read_ticks(run_dir)
    if ticks is None:
        return None
    times = ticks[:, 0]
    diffs = ticks[:, 4]
    if ticks[:, 3].tolist() != (ticks[:, 2] + diffs).tolist():
        return Verdict(CLAUSE_TICK_CONSISTENCY, False,
                       "diff column inconsistent with the two PnL columns")
    lookup = {int(t): int(d) for t, d in zip(times, diffs)}
    for p in phases:
        got = lookup.get(p["end_time"])
        if got is None:
            return Verdict(CLAUSE_TICK_CONSISTENCY, False,
                           f"phase {p['phase']}: end tick {p['end_time']} "
                           f"missing from ticks.csv")
        if got != p["diff_quanta"]:
            return Verdict(CLAUSE_TICK_CONSISTENCY, False,
                           f"phase {p['phase']}: ticks.csv diff {got} != "
                           f"phases.csv diff {p['diff_quanta']}")
    return Verdict(CLAUSE_TICK_CONSISTENCY, True, f"{len(phases)} phase ends")


def verify_run(run_dir: str | Path) -> list[Verdict]:
    """Re-check every provable invariant of a recorded run offline."""
    run_dir = Path(run_dir)
    summary = read_summary(run_dir)
    dominance = summary["config"]["dominance"]
    gamma = int(dominance["gamma"])
    tau = int(dominance["tau"])
    cap = int(dominance["queue_cap"])
    multiplier = int(summary["config"]["instrument"]["multiplier"])
    phases = read_phases(run_dir)
    records = read_delayed(run_dir)

    verdicts = [
        _check_per_order_gap(records, gamma, tau),
        _check_phase_identity(phases, records, multiplier),
        _check_lower_bound(phases, multiplier, gamma, tau),
        _check_positivity(phases),
        _check_monotonicity(phases),
        _check_queue_cap(records, cap),
    ]
    tick_verdict = _check_tick_consistency(run_dir, phases)
    if tick_verdict is not None:
        verdicts.append(tick_verdict)
    return verdicts


def all_passed(verdicts: list[Verdict]) -> bool:
    return all(v.passed for v in verdicts)
