"""Partial-reconfiguration energy accounting and the interval sweep."""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .core import ConfigError, ContractViolation
from .metrics import render


@dataclass(frozen=True)
class EnergyModel:
    per_slot_mj: Mapping[int, Fraction]

    def __post_init__(self) -> None:
        if any(e <= 0 for e in self.per_slot_mj.values()):
            raise ConfigError("energy per PR must be strictly positive")

    @classmethod
    def from_scenario(cls, scenario) -> "EnergyModel":
        base = {i: s.energy_mj for i, s in enumerate(scenario.slots)}
        if not scenario.kb_scaling:
            return cls(base)
        # Scale each slot's energy by its bitstream size relative to the mean.
        kbs = [s.bitstream_kb for s in scenario.slots]
        mean_kb = Fraction(sum(kbs), len(kbs))
        return cls({i: base[i] * kb / mean_kb for i, kb in enumerate(kbs)})

    def pr_energy(self, slot: int) -> Fraction:
        try:
            return self.per_slot_mj[slot]
        except KeyError:
            raise ContractViolation(f"PR event on unknown slot {slot}") from None


def total_energy(events: Iterable, model: EnergyModel) -> Fraction:
    """Energy of every PR event in ``events`` (a trace or a plain event list)."""
    events = getattr(events, "events", events)
    return sum((model.pr_energy(e.slot) for e in events if e.kind == "PR"), Fraction(0))


@dataclass(frozen=True)
class SweepRow:
    interval: int
    sod: Fraction
    energy_mj: Fraction
    pr_count: int
    utilization: Fraction


def tradeoff_sweep(scenario, policy: str, intervals: Sequence[int], workers: int = 1) -> list[SweepRow]:
    """One full run per interval length at a fixed horizon; rows sorted by interval."""
    from .engine import run_simulation

    if not intervals:
        raise ConfigError("intervals: at least one interval length is required")
    if any(i < 1 for i in intervals):
        raise ConfigError("intervals: lengths must be positive")

    def one(interval: int) -> SweepRow:
        trace = run_simulation(scenario.replace(interval_length=interval), policy, keep_snapshots=False)
        final = trace.final
        return SweepRow(interval, final.sod, final.energy_mj, final.pr_count, final.utilization)

    ordered = sorted(set(intervals))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(one, ordered))
    return [one(i) for i in ordered]


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["interval", "sod", "energy_mj", "pr_count", "utilization"])
        for r in rows:
            w.writerow([r.interval, render(r.sod, 6), render(r.energy_mj, 6), r.pr_count, render(r.utilization, 6)])
