import numpy as np
import pytest

from rspsim.errors import InvalidState
from rspsim.protocols import TargetState
from rspsim.sweep import (
    CSV_COLUMNS,
    rows_to_csv,
    sweep_rows,
    theta_grid,
    trial_uniforms,
)

TARGET = TargetState.of((0.6, 0.8j))
GRID = theta_grid(0.0, np.pi / 4, 21)


def test_trial_uniforms_deterministic_and_distinct():
    u1 = trial_uniforms(7, 3, 1000)
    u2 = trial_uniforms(7, 3, 1000)
    np.testing.assert_array_equal(u1, u2)
    assert np.all((0.0 <= u1) & (u1 < 1.0))
    assert len(np.unique(u1)) > 990
    assert np.any(trial_uniforms(7, 4, 1000) != u1)
    assert np.any(trial_uniforms(8, 3, 1000) != u1)


def test_trial_uniforms_prefix_stable():
    # trial t's uniform does not depend on how many trials are requested
    np.testing.assert_array_equal(trial_uniforms(1, 0, 100), trial_uniforms(1, 0, 500)[:100])


def test_probabilistic_sweep_matches_closed_form():
    rows = sweep_rows(["probabilistic"], TARGET, GRID, trials=1000, seed=11)
    assert len(rows) == 21
    for row in rows:
        assert abs(row.exact_prob - 2 * np.sin(row.theta) ** 2) <= 1e-12
        sigma = np.sqrt(max(row.exact_prob * (1 - row.exact_prob), 0.0) / row.trials)
        assert abs(row.est_prob - row.exact_prob) <= 4 * sigma + 1e-12
        assert row.est_prob == row.successes / row.trials


def test_deterministic_sweep_is_flat_one():
    rows = sweep_rows(["deterministic"], TARGET, GRID, trials=200, seed=3)
    for row in rows:
        assert abs(row.exact_prob - 1.0) <= 1e-12
        assert row.successes == row.trials
        assert abs(row.mean_fidelity - 1.0) <= 1e-10


def test_success_certain_edge_has_exact_counts():
    grid = theta_grid(np.pi / 4, np.pi / 4, 1)
    row = sweep_rows(["probabilistic"], TARGET, grid, trials=10_000, seed=1)[0]
    assert abs(row.exact_prob - 1.0) <= 1e-12
    assert row.successes == row.trials


def test_rows_sorted_by_protocol_then_theta():
    rows = sweep_rows(["probabilistic", "deterministic"], TARGET, GRID, trials=50, seed=2)
    keys = [(r.protocol, r.theta) for r in rows]
    assert keys == sorted(keys)


def test_csv_schema_and_determinism():
    rows = sweep_rows(["probabilistic"], TARGET, GRID, trials=500, seed=9)
    text1 = rows_to_csv(rows)
    text2 = rows_to_csv(sweep_rows(["probabilistic"], TARGET, GRID, trials=500, seed=9))
    assert text1 == text2
    lines = text1.split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 23  # header + 21 rows + trailing newline
    assert "\r" not in text1
    first = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert first["protocol"] == "probabilistic"
    assert first["trials"] == "500"
    assert first["seed"] == "9"


def test_csv_floats_use_12_significant_digits():
    rows = sweep_rows(["probabilistic"], TARGET, theta_grid(0.1, 0.1, 1), trials=10, seed=0)
    line = rows_to_csv(rows).split("\n")[1]
    fields = dict(zip(CSV_COLUMNS, line.split(",")))
    assert fields["theta"] == f"{0.1:.12g}"
    assert fields["exact_prob"] == f"{rows[0].exact_prob:.12g}"


def test_sweep_guards():
    with pytest.raises(InvalidState):
        sweep_rows(["probabilistic"], TARGET, GRID, trials=0, seed=0)
    with pytest.raises(InvalidState):
        theta_grid(1.0, 0.0, 5)
    with pytest.raises(InvalidState):
        theta_grid(0.0, 1.0, 0)
    with pytest.raises(InvalidState):
        sweep_rows(["probabilistic"], TargetState.of((1.0, 0, 0)), GRID, trials=5, seed=0)
