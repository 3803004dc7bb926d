from fractions import Fraction

import pytest

from slotsched.core import ConfigError, ContractViolation
from slotsched.energy import EnergyModel, total_energy, tradeoff_sweep, write_sweep_csv
from slotsched.engine import Event, EventKind, run_simulation
from slotsched.workload import table2_scenario


def test_flat_energy_per_pr():
    model = EnergyModel.from_scenario(table2_scenario())
    assert model.pr_energy(2) == Fraction(5, 4)
    with pytest.raises(ContractViolation):
        model.pr_energy(3)


def test_kb_scaled_energy_keeps_mean():
    sc = table2_scenario().replace(kb_scaling=True)
    model = EnergyModel.from_scenario(sc)
    assert sum(model.per_slot_mj.values()) / 3 == Fraction(5, 4)
    assert model.pr_energy(1) > model.pr_energy(0) > model.pr_energy(2)


def test_energy_must_be_positive():
    with pytest.raises(ConfigError):
        EnergyModel({0: Fraction(0)})


def test_total_energy_counts_pr_events_only():
    model = EnergyModel({0: Fraction(1), 1: Fraction(3)})
    events = [Event(0, 0, EventKind.PR, 0), Event(0, 0, EventKind.ASSIGN, 0), Event(4, 1, EventKind.PR, 1)]
    assert total_energy(events, model) == 4


def test_trace_energy_matches_snapshot():
    trace = run_simulation(table2_scenario(horizon=3600), "themis")
    assert total_energy(trace, EnergyModel.from_scenario(trace.scenario)) == trace.final.energy_mj


def test_sweep_sorted_and_thread_independent(tmp_path):
    sc = table2_scenario(horizon=2000)
    rows = tradeoff_sweep(sc, "themis", [8, 1, 4, 8])
    assert [r.interval for r in rows] == [1, 4, 8]
    assert tradeoff_sweep(sc, "themis", [8, 1, 4], workers=3) == rows
    write_sweep_csv(rows, tmp_path / "sweep.csv")
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "interval,sod,energy_mj,pr_count,utilization" and len(lines) == 4


def test_sweep_direction():
    rows = tradeoff_sweep(table2_scenario(horizon=5000), "themis", [1, 64])
    assert rows[0].energy_mj > rows[1].energy_mj
    assert rows[0].sod < rows[1].sod


@pytest.mark.parametrize("intervals", [[], [0, 4]])
def test_sweep_rejects_bad_intervals(intervals):
    with pytest.raises(ConfigError):
        tradeoff_sweep(table2_scenario(), "themis", intervals)
