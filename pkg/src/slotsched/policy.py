"""The interface every scheduling policy implements."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Sequence

from .core import AllocationLedger, ConfigError, Request, SlotState, TenantProfile


@dataclass
class PolicyDecision:
    """New occupants for this interval.

    ``preemptions`` lists slots whose *running* task is evicted; an assignment
    to such a slot installs the replacement. ``pr_events`` lists slots that
    reconfigure.
    """

    assignments: dict[int, int] = field(default_factory=dict)
    preemptions: set[int] = field(default_factory=set)
    pr_events: set[int] = field(default_factory=set)


@dataclass
class SchedulingView:
    tenants: Sequence[TenantProfile]
    slots: Sequence[SlotState]
    ledger: AllocationLedger
    now: int
    interval_index: int
    new_requests: Sequence[Request]


class Policy:
    name = "abstract"
    # Baselines only schedule at boundaries where every task has finished.
    requires_full_interval = False

    def validate(self, scenario) -> None:
        if self.requires_full_interval and scenario.interval_length < scenario.max_comp_time:
            raise ConfigError(
                f"interval_length: {self.name} needs an interval of at least the longest "
                f"comp_time ({scenario.max_comp_time}); got {scenario.interval_length}. "
                f"Comparisons against the baselines conventionally use 36."
            )

    def schedule(self, view: SchedulingView) -> PolicyDecision:
        raise NotImplementedError

    def state_dict(self) -> dict[str, Any]:
        return {}

    def load_state_dict(self, state: dict[str, Any]) -> None:
        pass


class Backlog:
    """Pending request counts per tenant for the queue-agnostic baselines."""

    def __init__(self) -> None:
        self.pending: Counter[int] = Counter()

    def add(self, requests: Sequence[Request]) -> None:
        for r in requests:
            self.pending[r.tenant] += 1

    def take(self, tenant: int) -> None:
        self.pending[tenant] -= 1
        if not self.pending[tenant]:
            del self.pending[tenant]

    def __contains__(self, tenant: int) -> bool:
        return self.pending.get(tenant, 0) > 0

    def state_dict(self) -> dict[str, int]:
        return {str(t): n for t, n in sorted(self.pending.items())}

    def load_state_dict(self, state: dict[str, int]) -> None:
        self.pending = Counter({int(t): n for t, n in state.items()})


def feasible(areas: Sequence[int], capacities: Sequence[int]) -> bool:
    """Can every area be placed in a distinct slot of at least that capacity?"""
    if len(areas) > len(capacities):
        return False
    a = sorted(areas, reverse=True)
    c = sorted(capacities, reverse=True)
    return all(x <= y for x, y in zip(a, c))
