"""Credit-based fair slot scheduling with PR suppression.

Each allocation grants a tenant credit equal to its adjustment value
(area x comp_time); a preemption revokes it. Average allocation is credit over
elapsed time, and since every tenant shares the same denominator, all
comparisons below are done on integer credit.

One scheduling round at an interval boundary:

1. Initialization. Empty slots are filled by repeatedly taking the pending
   tenant with the lowest credit (ties: most recently queued first) whose
   request can still be placed, and granting it immediately, so a tenant that
   stays lowest after its grant may take a second slot. The chosen tenants
   are then placed smaller-tenant-into-smaller-slot, reusing a slot already
   configured for the tenant when that keeps the placement feasible.
2. Competition. Slots in ascending capacity order; a pending tenant
   replaces the occupant only if its credit is strictly below the occupant's
   credit minus the occupant's adjustment value. The lowest-credit winner is
   chosen, at most one swap per slot, and the evicted request goes back on top
   of the LIFO queue to restart from scratch later. Passes repeat until no
   unswapped slot has a winning challenger.
3. PR execution. A slot reconfigures only when its new tenant differs from
   the bitstream it already holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .core import Request, SlotState, TaskQueue, TenantProfile
from .policy import Policy, PolicyDecision, SchedulingView, feasible


@dataclass
class ThemisState:
    queue: TaskQueue = field(default_factory=TaskQueue)
    elapsed: int = 0
    # Candidate evaluations of the selection and swapping rules, for cost measurements.
    evaluations: int = 0


def swapping_wins(challenger: int, incumbent: int, credit: Mapping[int, int], av: Mapping[int, int]) -> bool:
    """Strict test; a tie keeps the incumbent (and avoids a PR)."""
    return credit[challenger] < credit[incumbent] - av[incumbent]


def _by_capacity(slots: Sequence[SlotState]) -> list[SlotState]:
    return sorted(slots, key=lambda s: (s.capacity, s.id))


def _place(chosen: list[int], free: list[SlotState], tenants: Sequence[TenantProfile]) -> dict[int, int]:
    order = sorted(range(len(chosen)), key=lambda k: (tenants[chosen[k]].area, k))
    remaining = _by_capacity(free)
    placed: dict[int, int] = {}
    for pos, k in enumerate(order):
        t = chosen[k]
        rest = [tenants[chosen[j]].area for j in order[pos + 1:]]
        options = [s for s in remaining if s.capacity >= tenants[t].area]
        options.sort(key=lambda s: s.configured_tenant != t)  # stable: reuse first, then best fit
        for s in options:
            others = [o.capacity for o in remaining if o is not s]
            if feasible(rest, others):
                placed[s.id] = t
                remaining.remove(s)
                break
    return placed


def initialization_stage(
    queue: TaskQueue,
    slots: Sequence[SlotState],
    tenants: Sequence[TenantProfile],
    credit: dict[int, int],
    state: ThemisState | None = None,
) -> dict[int, int]:
    """Fill empty slots; mutates ``queue`` and the scratch ``credit``."""
    free = [s for s in slots if s.occupant is None]
    capacities = [s.capacity for s in free]
    chosen: list[int] = []
    while len(chosen) < len(free) and queue:
        areas = [tenants[t].area for t in chosen]
        best = None
        for rank, t in enumerate(queue.tenants_lifo()):
            if state is not None:
                state.evaluations += 1
            if not feasible(areas + [tenants[t].area], capacities):
                continue
            key = (credit[t], rank)
            if best is None or key < best[0]:
                best = (key, t)
        if best is None:
            break
        t = best[1]
        queue.take(t)
        credit[t] += tenants[t].adjustment_value
        chosen.append(t)
    return _place(chosen, free, tenants)


def competition_stage(
    queue: TaskQueue,
    slots: Sequence[SlotState],
    tenants: Sequence[TenantProfile],
    credit: dict[int, int],
    assignments: dict[int, int],
    interval_index: int,
    state: ThemisState | None = None,
) -> set[int]:
    """Challenge every occupied slot once; returns slots whose running task was evicted.

    ``assignments`` is updated in place with the winners.
    """
    av = {t.id: t.adjustment_value for t in tenants}
    preempted: set[int] = set()
    swapped: set[int] = set()
    # An eviction lowers the evicted tenant's credit, which can reopen a slot
    # already checked in this pass, so passes repeat until nothing changes.
    changed = True
    while changed:
        changed = False
        for slot in _by_capacity(slots):
            if slot.id in swapped:
                continue
            incumbent = assignments.get(slot.id, slot.occupant)
            if incumbent is None:
                continue
            winner = None
            for rank, t in enumerate(queue.tenants_lifo()):
                if state is not None:
                    state.evaluations += 1
                if t == incumbent or tenants[t].area > slot.capacity:
                    continue
                if swapping_wins(t, incumbent, credit, av):
                    key = (credit[t], rank)
                    if winner is None or key < winner[0]:
                        winner = (key, t)
            if winner is None:
                continue
            challenger = winner[1]
            queue.take(challenger)
            credit[incumbent] -= av[incumbent]
            credit[challenger] += av[challenger]
            queue.enqueue(Request(incumbent, interval_index))
            if slot.id not in assignments:
                preempted.add(slot.id)
            assignments[slot.id] = challenger
            swapped.add(slot.id)
            changed = True
    return preempted


def pr_execution_stage(slots: Sequence[SlotState], assignments: Mapping[int, int]) -> set[int]:
    configured = {s.id: s.configured_tenant for s in slots}
    return {sid for sid, t in assignments.items() if configured[sid] != t}


def schedule_interval(
    state: ThemisState,
    slots: Sequence[SlotState],
    tenants: Sequence[TenantProfile],
    credit: Mapping[int, int],
    new_requests: Sequence[Request],
    now: int = 0,
    interval_index: int = 0,
) -> PolicyDecision:
    # A batch goes on in reverse so its first-submitted request sits on top.
    for r in reversed(new_requests):
        state.queue.enqueue(r)
    scratch = dict(credit)
    assignments = initialization_stage(state.queue, slots, tenants, scratch, state)
    preemptions = competition_stage(state.queue, slots, tenants, scratch, assignments, interval_index, state)
    state.elapsed = now
    return PolicyDecision(assignments, preemptions, pr_execution_stage(slots, assignments))


class ThemisPolicy(Policy):
    name = "themis"

    def __init__(self) -> None:
        self.state = ThemisState()

    def schedule(self, view: SchedulingView) -> PolicyDecision:
        return schedule_interval(
            self.state, view.slots, view.tenants, view.ledger.credit, view.new_requests, view.now, view.interval_index
        )

    def state_dict(self) -> dict:
        return {
            "elapsed": self.state.elapsed,
            "queue": [[r.tenant, r.submit_interval] for r in self.state.queue.entries],
        }

    def load_state_dict(self, state: dict) -> None:
        self.state = ThemisState(TaskQueue(Request(t, i) for t, i in state["queue"]), state["elapsed"])
