import csv
import io

import numpy as np
import pytest
from scipy import stats

from rcga.experiments.verify import (
    FLOOR_CELLS,
    ORACLE_MC_MAX_N,
    VerifySettings,
    Verifier,
    agreement_z,
    near_target_row,
    random_bordered_row,
    verify,
)
from rcga.model import borders


def test_random_bordered_rows_respect_borders():
    rng = np.random.default_rng(0)
    lo, hi = borders(12, 4)
    for _ in range(50):
        row = random_bordered_row(12, 4, rng)
        assert row.min() >= lo - 1e-12 and row.max() <= hi
        assert row.sum() == pytest.approx(1.0)


@pytest.mark.parametrize("n,r,K", FLOOR_CELLS)
def test_near_target_rows_crowd_the_cap(n, r, K):
    rng = np.random.default_rng(3)
    lo, hi = borders(n, r)
    target = 1.0 - 1.0 / n - 1.0 / K
    for winner in range(r):
        row = near_target_row(n, r, K, winner, rng)
        assert row.sum() == pytest.approx(1.0)
        assert row.min() >= lo - 1e-12 and row.max() <= hi
        assert target - 2.0 / K <= row[winner] <= target


def _small_settings(**kw):
    base = dict(n_values=(10,), r_values=(2,), K=1000.0, pzero_samples=2_000, drift_samples=10_000,
                model_steps=200, floor_updates=2_000, random_matrices=3, seed=1)
    base.update(kw)
    return VerifySettings(**base)


def test_verifier_runs_every_check():
    report = Verifier(_small_settings()).run_all()
    names = {c.name for c in report.checks}
    assert {
        "row_sum", "border_containment", "well_behaved", "winner_increment_floor",
        "sampling_gof", "pzero_closed_form", "oracle_symmetry", "oracle_mc_agreement",
        "pzero_lemma", "step_drift_lemma", "phi_drift_lemma", "mgf_subgaussian",
        "phi_subgaussian_exponent",
    } <= names
    assert report.ok
    assert report.table().header == ("check_name", "params", "estimate", "bound", "pass")


def test_exact_row_sums_are_checked_in_integers():
    v = Verifier(_small_settings(model_steps=200))
    v.check_model_invariants()
    sums = {c.params: c for c in v.report.checks if c.name == "row_sum"}
    exact = sums["n=50;r=5;K=500.0;mode=unbordered"]
    assert exact.estimate == 0.0 and exact.bound == 0.0
    assert exact.passed
    assert sums["n=50;r=5;K=500.0;mode=bordered"].bound == 1e-9
    assert v.report.ok


def test_increment_floor_cells_have_positive_floors():
    v = Verifier(_small_settings(floor_updates=400))
    v.check_winner_increment_floor()
    checks = v.report.checks
    assert len(checks) == len(FLOOR_CELLS)
    for c, (n, r, K) in zip(checks, FLOOR_CELLS):
        assert c.bound == pytest.approx(1.0 / K - 1.0 / ((r - 1) * n))
        assert c.bound > 0
        assert c.passed


def test_increment_floor_fails_when_the_bound_is_inflated():
    v = Verifier(_small_settings(floor_updates=40, bound_scale=1e6))
    v.check_winner_increment_floor()
    assert all(c.failed for c in v.report.checks)


def test_agreement_margin_is_family_wise():
    assert agreement_z(_small_settings()) == 3.0
    z = agreement_z(VerifySettings())
    assert z == pytest.approx(stats.norm.isf(0.01 / 24))
    assert z > 3.0


def test_oracle_monte_carlo_stays_on_small_n():
    v = Verifier(_small_settings(n_values=(ORACLE_MC_MAX_N + 50,)))
    v.check_oracle(ORACLE_MC_MAX_N + 50, 2)
    assert [c.name for c in v.report.checks] == ["oracle_symmetry", "oracle_symmetry"]
    v.check_oracle(10, 2)
    assert [c.name for c in v.report.checks[2:]] == [
        "oracle_symmetry", "oracle_mc_agreement", "oracle_symmetry", "oracle_mc_agreement",
    ]


def test_report_numbers_survive_the_csv():
    v = Verifier(_small_settings(floor_updates=40))
    v.check_winner_increment_floor()
    v.check_step_drift(100, 5)
    rows = list(csv.reader(io.StringIO(v.report.table().to_csv())))[1:]
    assert len(rows) == len(v.report.checks)
    for row, c in zip(rows, v.report.checks):
        assert abs(float(row[2]) - c.estimate) <= 1e-12
        assert abs(float(row[3]) - c.bound) <= 1e-12
    g_bound = next(c.bound for c in v.report.checks if c.params.endswith("g-onemax"))
    assert g_bound < 1e-5
    assert float(rows[-1][3]) == g_bound


def test_small_n_is_flagged_not_failed():
    v = Verifier(_small_settings(n_values=(4,)))
    v.check_pzero_lemma(4, 2)
    (check,) = v.report.checks
    assert check.status == "small-n"
    assert not check.failed


def test_inflated_bounds_fail():
    v = Verifier(_small_settings(bound_scale=1e6))
    v.check_step_drift(10, 2)
    assert any(c.failed for c in v.report.checks)
    assert not v.report.ok


def test_verify_entry_point_is_reproducible():
    settings = _small_settings(model_steps=50, floor_updates=200)
    assert verify(settings).table().to_csv() == verify(settings).table().to_csv()
