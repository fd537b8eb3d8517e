import csv
import shutil
from pathlib import Path

import pytest

from edgesim.dominance import (CLAUSE_MONOTONICITY, CLAUSE_PER_ORDER_GAP,
                               CLAUSE_QUEUE_CAP, CLAUSE_TICK_CONSISTENCY)
from edgesim.harness import default_config, run_simulation
from edgesim.runio import (DELAYED_CSV, PHASES_CSV, TICKS_CSV, load_config,
                           read_delayed, read_phases, save_config,
                           write_run_artifacts)
from edgesim.verify import all_passed, verify_run


@pytest.fixture(scope="module")
def run_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    cfg = default_config(master_seed=63, target_phases=3)
    report = run_simulation(cfg)
    write_run_artifacts(report, out)
    return out


def _rewrite_csv(path: Path, mutate):
    with open(path, "r", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    mutate(body)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)


def _copy(run_dir: Path, tmp_path: Path) -> Path:
    dst = tmp_path / "mutated"
    shutil.copytree(run_dir, dst)
    return dst


def failed_clauses(verdicts):
    return {v.clause for v in verdicts if not v.passed}


def test_untampered_run_passes(run_dir):
    verdicts = verify_run(run_dir)
    assert all_passed(verdicts)
    clauses = {v.clause for v in verdicts}
    assert CLAUSE_PER_ORDER_GAP in clauses
    assert CLAUSE_TICK_CONSISTENCY in clauses


def test_perturbed_execution_price_fails_gap_clause(run_dir, tmp_path):
    dst = _copy(run_dir, tmp_path)
    summary_gap = 50  # gamma + tau of the default profile

    def mutate(body):
        # move one execution price back by gamma + tau, keeping the
        # recorded gap column consistent with the prices
        row = body[0]
        sign = int(row[1])
        row[6] = str(int(row[6]) - sign * summary_gap)
        row[7] = str(int(row[7]) - summary_gap)

    _rewrite_csv(dst / DELAYED_CSV, mutate)
    assert CLAUSE_PER_ORDER_GAP in failed_clauses(verify_run(dst))


def test_decreasing_phase_diffs_fail_monotonicity(run_dir, tmp_path):
    dst = _copy(run_dir, tmp_path)

    def mutate(body):
        body[-1][3] = str(int(body[0][3]) - 1)  # final diff below the first

    _rewrite_csv(dst / PHASES_CSV, mutate)
    assert CLAUSE_MONOTONICITY in failed_clauses(verify_run(dst))


def test_queue_cap_breach_fails_queue_clause(run_dir, tmp_path):
    dst = _copy(run_dir, tmp_path)
    records = read_delayed(dst)
    assert len(records) >= 4, "need at least cap+1 records for this mutation"

    def mutate(body):
        # stretch the first four entries into one overlapping window:
        # delayed at consecutive early ticks, all executed late together
        latest = max(int(r[5]) for r in body)
        for k in range(4):
            body[k][3] = str(k + 1)          # t_delay
            body[k][5] = str(latest + 10)    # t_exec
    _rewrite_csv(dst / DELAYED_CSV, mutate)
    assert CLAUSE_QUEUE_CAP in failed_clauses(verify_run(dst))


def test_tampered_tick_diff_fails_consistency(run_dir, tmp_path):
    dst = _copy(run_dir, tmp_path)
    phases = read_phases(dst)
    end = phases[0]["end_time"]
    path = dst / TICKS_CSV
    lines = path.read_text().splitlines()
    # row i corresponds to tick i-1 in the file (header first)
    parts = lines[end + 1].split(",")
    parts[4] = str(int(parts[4]) + 1)
    lines[end + 1] = ",".join(parts)
    path.write_text("\n".join(lines) + "\n")
    assert CLAUSE_TICK_CONSISTENCY in failed_clauses(verify_run(dst))


def test_verify_without_ticks_file(run_dir, tmp_path):
    dst = _copy(run_dir, tmp_path)
    (dst / TICKS_CSV).unlink()
    verdicts = verify_run(dst)
    assert all_passed(verdicts)
    assert CLAUSE_TICK_CONSISTENCY not in {v.clause for v in verdicts}


# -- config round trip ---------------------------------------------------------

def test_config_yaml_round_trip(tmp_path):
    cfg = default_config(master_seed=99, half_spread=1)
    path = tmp_path / "cfg.yaml"
    save_config(cfg, path)
    loaded = load_config(path)
    assert loaded == cfg


def test_config_defaults_from_empty_file(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_config(path) == default_config()


def test_config_fraction_forms(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(
        "price:\n  stay_probability: \"1/2\"\n"
        "strategy:\n  order_probability: 0.02\n"
        "dominance:\n  delay_probability: \"1/2\"\n")
    cfg = load_config(path)
    from fractions import Fraction
    assert cfg.price.stay_probability == Fraction(1, 2)
    assert cfg.strategy.order_probability == Fraction(1, 50)
    assert cfg.dominance.delay_probability == Fraction(1, 2)
