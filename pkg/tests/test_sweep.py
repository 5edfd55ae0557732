import math

import numpy as np
import pytest

from rcga.engine.runner import RunResult, TracePoint, replication_seeds, run
from rcga.experiments.sweep import (
    SWEEP_HEADER,
    CsvTable,
    SweepSpec,
    fmt,
    parse_grid,
    run_sweep,
    trace_table,
)
from rcga.fitness import FitnessId
from rcga.model import BorderMode


def test_parse_grid_ranges_are_inclusive():
    assert parse_grid("200:1000:100", float) == tuple(float(k) for k in range(200, 1001, 100))
    assert parse_grid("10,50,100") == (10, 50, 100)
    assert parse_grid("7") == (7,)


@pytest.mark.parametrize("text", ["", "1:2", "5:10:0", "a,b"])
def test_parse_grid_rejects_malformed(text):
    with pytest.raises(ValueError):
        parse_grid(text)


def test_fmt_is_locale_free():
    assert fmt(True) == "true"
    assert fmt(3) == "3"
    assert fmt(600.0) == "600"
    assert fmt(0.5) == "0.5"
    assert fmt(math.nan) == "nan"


def test_fmt_round_trips_small_floats():
    for value in (1.0000000000000002e-06, 2.220446049250313e-16, 1 / 3, 2659.35):
        assert float(fmt(value)) == value
    assert fmt(np.float64(0.125)) == "0.125"


def test_csv_table_is_rectangular():
    table = CsvTable(("a", "b"))
    table.add(1, 0.25)
    with pytest.raises(ValueError):
        table.add(1)
    assert table.to_csv() == "a,b\n1,0.25\n"
    table.add("x,y", 2)
    assert table.to_csv().splitlines()[-1] == "\"x,y\",2"


def _spec(**kw):
    base = dict(r=2, fitness=FitnessId.R_ONEMAX, mode=BorderMode.UNBORDERED, replications=2,
                base_seed=3, n_values=(5,), k_values=(20.0,), max_iterations=5_000)
    base.update(kw)
    return SweepSpec(**base)


def test_sweep_rows_follow_the_grid():
    table = run_sweep(_spec(n_values=(6, 4), k_values=(20.0, 10.0)))
    assert table.header == SWEEP_HEADER
    assert [(row[0], row[2]) for row in table.rows] == [("4", "10"), ("4", "20"), ("6", "10"), ("6", "20")]
    for row in table.rows:
        assert row[3] == "r-onemax"
        assert row[4] == "false"
        assert row[5] == "2"


def test_sweep_is_deterministic():
    assert run_sweep(_spec()).to_csv() == run_sweep(_spec()).to_csv()


def test_sweep_cell_matches_direct_runs():
    spec = _spec(replications=1)
    (row,) = run_sweep(spec).rows
    cfg = spec.cell_config(5, 20.0)
    result = run(cfg, replication_seeds(cfg)[0])
    if result.found_optimum:
        assert row[6] == "1"
        assert row[7] == fmt(float(result.iterations))
    else:
        assert row[6] == "0"
        assert row[7] == "nan"


def test_sweep_spec_validation():
    with pytest.raises(ValueError):
        _spec(replications=0)
    with pytest.raises(ValueError):
        _spec(k_values=(0.0,))
    with pytest.raises(ValueError):
        _spec(n_values=())


def test_trace_table_has_one_row_per_value():
    result = RunResult(True, 2, 3.0, 0, trace=[
        TracePoint(0, np.array([0.5, 0.5])),
        TracePoint(2, np.array([0.25, 0.75])),
    ])
    assert trace_table(result).to_csv() == (
        "iteration,value,frequency\n"
        "0,0,0.5\n0,1,0.5\n2,0,0.25\n2,1,0.75\n"
    )
