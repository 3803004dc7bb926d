"""Comparison policies: STFS and the round-robin variants.

The round-robin variants are reconstructions of policies that are only named,
not defined, in the work they are compared against. Each is self-contained
behind :class:`~slotsched.policy.Policy`, so an alternative reading can be
swapped in without touching the engine.

All four only schedule into empty slots and never preempt, and they
reconfigure every slot they fill, even when the same tenant comes back.
"""

from __future__ import annotations

from typing import Sequence

from .core import SlotState, TenantProfile
from .metrics import stfs_average_allocation
from .policy import Backlog, Policy, PolicyDecision, SchedulingView


def _free_slots(slots: Sequence[SlotState], descending: bool) -> list[SlotState]:
    free = [s for s in slots if s.occupant is None]
    if descending:
        free.sort(key=lambda s: (-s.capacity, s.id))
    return free


def _always_pr(assignments: dict[int, int]) -> PolicyDecision:
    return PolicyDecision(assignments, set(), set(assignments))


class StfsPolicy(Policy):
    """Fill the largest free slot with the most deprived fitting tenant.

    Deprivation is area x hmta / nti, where nti counts every interval.
    The allocation is refreshed after each grant, so a pending tenant with
    several requests can take more than one slot only while it stays most
    deprived.
    """

    name = "stfs"
    requires_full_interval = True

    def __init__(self) -> None:
        self.backlog = Backlog()
        self.nti = 0

    def schedule(self, view: SchedulingView) -> PolicyDecision:
        self.backlog.add(view.new_requests)
        self.nti += 1
        hmta = dict(view.ledger.hmta)
        submitted = {}
        for pos, r in enumerate(view.new_requests):
            submitted.setdefault(r.tenant, pos)
        assignments: dict[int, int] = {}
        for slot in _free_slots(view.slots, descending=True):
            best = None
            for t in self.backlog.pending:
                tenant = view.tenants[t]
                if tenant.area > slot.capacity:
                    continue
                key = (
                    stfs_average_allocation(tenant.area, hmta[t], self.nti),
                    submitted.get(t, len(view.new_requests)),
                    t,
                )
                if best is None or key < best:
                    best = key
            if best is None:
                continue
            t = best[2]
            self.backlog.take(t)
            hmta[t] += 1
            assignments[slot.id] = t
        return _always_pr(assignments)

    def state_dict(self) -> dict:
        return {"nti": self.nti, "backlog": self.backlog.state_dict()}

    def load_state_dict(self, state: dict) -> None:
        self.nti = state["nti"]
        self.backlog.load_state_dict(state["backlog"])


class _CursorPolicy(Policy):
    requires_full_interval = True
    relaxed = False

    def __init__(self) -> None:
        self.backlog = Backlog()
        self.cursor = 0

    def _rotation(self, order: Sequence[int]) -> list[int]:
        n = len(order)
        return [order[(self.cursor + k) % n] for k in range(n)]

    def schedule(self, view: SchedulingView) -> PolicyDecision:
        self.backlog.add(view.new_requests)
        order = [t.id for t in view.tenants]
        assignments: dict[int, int] = {}
        for slot in _free_slots(view.slots, descending=False):
            waiting = [t for t in self._rotation(order) if t in self.backlog]
            if not waiting:
                break
            if self.relaxed:
                pick = next((t for t in waiting if view.tenants[t].area <= slot.capacity), None)
            else:
                pick = waiting[0] if view.tenants[waiting[0]].area <= slot.capacity else None
            if pick is None:
                # Plain: the head keeps its turn and this slot idles.
                # Relaxed: nothing fits after a full rotation; the cursor stays put.
                continue
            self.backlog.take(pick)
            self.cursor = (order.index(pick) + 1) % len(order)
            assignments[slot.id] = pick
        return _always_pr(assignments)

    def state_dict(self) -> dict:
        return {"cursor": self.cursor, "backlog": self.backlog.state_dict()}

    def load_state_dict(self, state: dict) -> None:
        self.cursor = state["cursor"]
        self.backlog.load_state_dict(state["backlog"])


class PrrPolicy(_CursorPolicy):
    """Plain round robin: the next tenant in turn gets the next slot or nobody does."""

    name = "prr"


class RrrPolicy(_CursorPolicy):
    """Relaxed round robin: tenants that do not fit the slot are passed over."""

    name = "rrr"
    relaxed = True


def default_quantum(tenants: Sequence[TenantProfile]) -> int:
    """Mean adjustment value, rounded up."""
    total = sum(t.adjustment_value for t in tenants)
    return -(-total // len(tenants))


class DrrPolicy(Policy):
    """Deficit round robin over area x time.

    Every interval each backlogged tenant earns ``quantum``; it may take a
    fitting slot while its deficit covers its adjustment value. Slots go
    largest first to eligible tenants in cursor order. A tenant with nothing
    pending has its deficit reset, as in classic DRR.
    """

    name = "drr"
    requires_full_interval = True

    def __init__(self, quantum: int | None = None) -> None:
        self.quantum = quantum
        self.backlog = Backlog()
        self.deficit: dict[int, int] = {}
        self.cursor = 0

    def add_round(self, tenants: Sequence[TenantProfile]) -> None:
        if self.quantum is None:
            self.quantum = default_quantum(tenants)
        for t in tenants:
            if t.id in self.backlog:
                self.deficit[t.id] = self.deficit.get(t.id, 0) + self.quantum
            else:
                self.deficit[t.id] = 0

    def eligible(self, tenant: TenantProfile) -> bool:
        return self.deficit.get(tenant.id, 0) >= tenant.adjustment_value

    def schedule(self, view: SchedulingView) -> PolicyDecision:
        self.backlog.add(view.new_requests)
        self.add_round(view.tenants)
        n = len(view.tenants)
        assignments: dict[int, int] = {}
        for slot in _free_slots(view.slots, descending=True):
            for k in range(n):
                t = view.tenants[(self.cursor + k) % n]
                if t.id in self.backlog and t.area <= slot.capacity and self.eligible(t):
                    self.backlog.take(t.id)
                    self.deficit[t.id] -= t.adjustment_value
                    self.cursor = (t.id + 1) % n
                    assignments[slot.id] = t.id
                    break
        return _always_pr(assignments)

    def state_dict(self) -> dict:
        return {
            "quantum": self.quantum,
            "cursor": self.cursor,
            "deficit": {str(t): d for t, d in sorted(self.deficit.items())},
            "backlog": self.backlog.state_dict(),
        }

    def load_state_dict(self, state: dict) -> None:
        self.quantum = state["quantum"]
        self.cursor = state["cursor"]
        self.deficit = {int(t): d for t, d in state["deficit"].items()}
        self.backlog.load_state_dict(state["backlog"])


__all__ = ["StfsPolicy", "PrrPolicy", "RrrPolicy", "DrrPolicy", "default_quantum"]
