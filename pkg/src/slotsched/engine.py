"""Discrete-time simulation loop and trace export."""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass, field, replace
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

from .baselines import DrrPolicy, PrrPolicy, RrrPolicy, StfsPolicy
from .core import AllocationLedger, ConfigError, ContractViolation, SimClock, SlotState
from .energy import EnergyModel
from .metrics import desired_average_allocation, render, running_total_execution_time
from .policy import Policy, PolicyDecision, SchedulingView
from .themis import ThemisPolicy
from .workload import Scenario, generate_demands

POLICIES: dict[str, type[Policy]] = {
    "themis": ThemisPolicy,
    "stfs": StfsPolicy,
    "prr": PrrPolicy,
    "rrr": RrrPolicy,
    "drr": DrrPolicy,
}


def make_policy(name: str) -> Policy:
    try:
        return POLICIES[name]()
    except KeyError:
        raise ConfigError(f"unknown policy {name!r}; valid policies: {', '.join(POLICIES)}") from None


class EventKind(str, Enum):
    ASSIGN = "ASSIGN"
    PREEMPT = "PREEMPT"
    COMPLETE = "COMPLETE"
    PR = "PR"
    IDLE = "IDLE"

    def __str__(self) -> str:
        return self.value


class Event(NamedTuple):
    time: int
    slot: int
    kind: EventKind
    tenant: Optional[int]


@dataclass(frozen=True)
class Snapshot:
    """Cumulative state at the end of one interval.

    ``execution_time`` is the running sum of comp_time x HMTA over tenants;
    ``time`` is the wall-clock end of the interval.
    """

    interval: int
    time: int
    credits: tuple[int, ...]
    execution_time: int
    slot_count: int
    sod: Fraction
    utilization: Fraction
    pr_count: int
    energy_mj: Fraction

    @property
    def avg_alloc(self) -> dict[int, Fraction]:
        if self.execution_time == 0:
            return {t: Fraction(0) for t in range(len(self.credits))}
        return {t: Fraction(c * self.slot_count, self.execution_time) for t, c in enumerate(self.credits)}


@dataclass
class SimulationTrace:
    scenario: Scenario
    policy: str
    desired: Fraction
    events: list[Event] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    request_digest: str = ""

    @property
    def slot_count(self) -> int:
        return self.scenario.slot_count

    @property
    def horizon(self) -> int:
        return self.scenario.horizon

    @property
    def final(self) -> Snapshot:
        if not self.snapshots:
            raise ContractViolation("trace has no snapshots")
        return self.snapshots[-1]

    def tenant_name(self, tenant: Optional[int]) -> str:
        return "" if tenant is None else self.scenario.tenants[tenant].name


def sod_exact(credits: Sequence[int], execution_time: int, slot_count: int, desired: Fraction) -> Fraction:
    """SOD over per-slot average allocations, using one common denominator."""
    if execution_time == 0:
        return desired * len(credits)
    p, q = desired.numerator, desired.denominator
    return Fraction(sum(abs(c * slot_count * q - p * execution_time) for c in credits), execution_time * q)


class Simulator:
    """Steps one scenario under one policy; holds all mutable run state."""

    def __init__(self, scenario: Scenario, policy: str | Policy, keep_snapshots: bool = True) -> None:
        self.scenario = scenario
        self.policy = make_policy(policy) if isinstance(policy, str) else policy
        self.policy.validate(scenario)
        self.keep_snapshots = keep_snapshots
        self.tenants = scenario.tenants
        self.desired = desired_average_allocation(scenario.tenants, scenario.slot_count)
        self.energy_model = EnergyModel.from_scenario(scenario)
        self.slots = [SlotState(i, s.capacity, s.bitstream_kb) for i, s in enumerate(scenario.slots)]
        self.ledger = AllocationLedger.for_tenants(scenario.tenants)
        self.clock = SimClock(scenario.interval_length)
        self.rng_state = scenario.demand.seed
        self.busy = 0
        self.pr_count = 0
        self.energy = Fraction(0)
        self.digest = ""
        self.trace = SimulationTrace(scenario, self.policy.name, self.desired)

    @property
    def done(self) -> bool:
        return self.clock.now >= self.scenario.horizon

    def step(self) -> list[Event]:
        """One scheduler evaluation plus up to one interval of task progress."""
        if self.done:
            raise ContractViolation("simulation already reached its horizon")
        now = self.clock.now
        index = self.clock.interval_index
        requests, self.rng_state = generate_demands(self.scenario.demand, self.tenants, index, self.rng_state)
        batch = ",".join(str(r.tenant) for r in requests)
        self.digest = hashlib.sha256(f"{self.digest}|{index}:{batch}".encode()).hexdigest()

        view = SchedulingView(self.tenants, [replace(s) for s in self.slots], self.ledger, now, index, requests)
        events = self._apply(self.policy.schedule(view), now)

        end = min(now + self.scenario.interval_length, self.scenario.horizon)
        completions = []
        for slot in self.slots:
            if slot.occupant is None:
                continue
            run = min(slot.remaining_time, end - now)
            self.busy += run
            slot.remaining_time -= run
            if slot.remaining_time == 0:
                completions.append(Event(now + run, slot.id, EventKind.COMPLETE, slot.occupant))
                slot.occupant = None
        completions.sort(key=lambda e: (e.time, e.slot))
        events.extend(completions)
        self.clock.now = end

        self.trace.events.extend(events)
        credits = tuple(self.ledger.credit[t.id] for t in self.tenants)
        tet = running_total_execution_time(self.tenants, self.ledger.hmta)
        snap = Snapshot(
            interval=index,
            time=end,
            credits=credits,
            execution_time=tet,
            slot_count=len(self.slots),
            sod=sod_exact(credits, tet, len(self.slots), self.desired),
            utilization=Fraction(self.busy, len(self.slots) * end),
            pr_count=self.pr_count,
            energy_mj=self.energy,
        )
        if self.keep_snapshots or not self.trace.snapshots:
            self.trace.snapshots.append(snap)
        else:
            self.trace.snapshots[-1] = snap
        return events

    def _apply(self, decision: PolicyDecision, now: int) -> list[Event]:
        by_id = {s.id: s for s in self.slots}
        for sid in decision.preemptions:
            if sid not in by_id or by_id[sid].occupant is None:
                raise ContractViolation(f"{self.policy.name}: preemption of empty or unknown slot {sid}")
        for sid, t in decision.assignments.items():
            slot = by_id.get(sid)
            if slot is None:
                raise ContractViolation(f"{self.policy.name}: assignment to unknown slot {sid}")
            if slot.occupant is not None and sid not in decision.preemptions:
                raise ContractViolation(f"{self.policy.name}: slot {sid} is occupied")
            if self.tenants[t].area > slot.capacity:
                raise ContractViolation(
                    f"{self.policy.name}: {self.tenants[t].name} (area {self.tenants[t].area}) "
                    f"does not fit slot {sid} (capacity {slot.capacity})"
                )
        if not decision.pr_events <= set(decision.assignments):
            raise ContractViolation(f"{self.policy.name}: PR on a slot that received no tenant")

        events: list[Event] = []
        for slot in self.slots:
            sid = slot.id
            if sid in decision.preemptions:
                events.append(Event(now, sid, EventKind.PREEMPT, slot.occupant))
                self.ledger.revoke(slot.occupant)
                slot.occupant, slot.remaining_time = None, 0
            if sid in decision.assignments:
                t = decision.assignments[sid]
                pr = sid in decision.pr_events
                if pr:
                    events.append(Event(now, sid, EventKind.PR, t))
                    self.pr_count += 1
                    self.energy += self.energy_model.pr_energy(sid)
                    slot.configured_tenant = t
                elif slot.configured_tenant != t:
                    raise ContractViolation(f"{self.policy.name}: slot {sid} changes tenant without a PR")
                events.append(Event(now, sid, EventKind.ASSIGN, t))
                self.ledger.grant(t)
                slot.occupant = t
                slot.remaining_time = self.tenants[t].comp_time + (self.scenario.pr_latency if pr else 0)
            if slot.occupant is None:
                events.append(Event(now, sid, EventKind.IDLE, None))
        return events

    def run(self) -> SimulationTrace:
        while not self.done:
            self.step()
        self.trace.request_digest = self.digest
        return self.trace

    def state_dict(self) -> dict:
        return {
            "policy": self.policy.name,
            "now": self.clock.now,
            "rng_state": self.rng_state,
            "busy": self.busy,
            "pr_count": self.pr_count,
            "energy_mj": str(self.energy),
            "digest": self.digest,
            "slots": [
                {"occupant": s.occupant, "remaining_time": s.remaining_time, "configured_tenant": s.configured_tenant}
                for s in self.slots
            ],
            "credit": [self.ledger.credit[t.id] for t in self.tenants],
            "hmta": [self.ledger.hmta[t.id] for t in self.tenants],
            "policy_state": self.policy.state_dict(),
        }

    @classmethod
    def from_state_dict(cls, scenario: Scenario, state: dict, keep_snapshots: bool = True) -> "Simulator":
        sim = cls(scenario, state["policy"], keep_snapshots)
        sim.clock.now = state["now"]
        sim.rng_state = state["rng_state"]
        sim.busy = state["busy"]
        sim.pr_count = state["pr_count"]
        sim.energy = Fraction(state["energy_mj"])
        sim.digest = state["digest"]
        for slot, saved in zip(sim.slots, state["slots"]):
            slot.occupant = saved["occupant"]
            slot.remaining_time = saved["remaining_time"]
            slot.configured_tenant = saved["configured_tenant"]
        for t in scenario.tenants:
            sim.ledger.credit[t.id] = state["credit"][t.id]
            sim.ledger.hmta[t.id] = state["hmta"][t.id]
        sim.policy.load_state_dict(state["policy_state"])
        return sim


def run_simulation(scenario: Scenario, policy: str | Policy, keep_snapshots: bool = True) -> SimulationTrace:
    return Simulator(scenario, policy, keep_snapshots).run()


TRACE_HEADER = ["time", "slot", "event", "tenant"]
SNAPSHOT_HEADER = ["interval", "tenant", "avg_alloc", "sod", "utilization", "pr_count", "energy_mj"]


def write_trace_csv(trace: SimulationTrace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for e in trace.events:
            w.writerow([e.time, e.slot, e.kind.value, trace.tenant_name(e.tenant)])


def write_snapshots_csv(trace: SimulationTrace, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SNAPSHOT_HEADER)
        for s in trace.snapshots:
            sod, util, energy = render(s.sod, 6), render(s.utilization, 6), render(s.energy_mj, 6)
            for t, aa in s.avg_alloc.items():
                w.writerow([s.interval, trace.scenario.tenants[t].name, render(aa, 6), sod, util, s.pr_count, energy])
