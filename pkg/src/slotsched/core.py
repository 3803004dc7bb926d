"""Domain types and mutable simulation state shared by every policy."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional


class SchedulingError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SchedulingError, ValueError):
    """A scenario, model or CLI option is invalid."""


class ContractViolation(SchedulingError, RuntimeError):
    """An operation was called outside its contract, or a policy broke an invariant."""


class EmptyQueueError(ContractViolation, IndexError):
    pass


class WorkloadOverflowError(SchedulingError, OverflowError):
    """Integer target arithmetic left the unsigned 64-bit range."""


U64_MAX = (1 << 64) - 1


def check_u64(value: int, what: str) -> int:
    if value < 0 or value > U64_MAX:
        raise WorkloadOverflowError(f"{what} = {value} does not fit in 64 unsigned bits")
    return value


@dataclass(frozen=True)
class TenantProfile:
    id: int
    name: str
    area: int
    comp_time: int

    def __post_init__(self) -> None:
        if isinstance(self.area, bool) or not isinstance(self.area, int) or self.area < 1:
            raise ConfigError(f"tenant {self.name!r}: area must be a positive integer, got {self.area!r}")
        if isinstance(self.comp_time, bool) or not isinstance(self.comp_time, int) or self.comp_time < 1:
            raise ConfigError(
                f"tenant {self.name!r}: comp_time must be a positive integer, got {self.comp_time!r}"
            )

    @property
    def adjustment_value(self) -> int:
        return self.area * self.comp_time


@dataclass
class SlotState:
    id: int
    capacity: int
    bitstream_kb: int = 1
    occupant: Optional[int] = None
    remaining_time: int = 0
    # Bitstream currently loaded; survives idle gaps so a same-tenant refill needs no PR.
    configured_tenant: Optional[int] = None

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise ConfigError(f"slot {self.id}: capacity must be positive")
        if self.bitstream_kb < 1:
            raise ConfigError(f"slot {self.id}: bitstream_kb must be positive")

    @property
    def is_free(self) -> bool:
        return self.occupant is None

    def fits(self, tenant: TenantProfile) -> bool:
        return tenant.area <= self.capacity


@dataclass(frozen=True)
class Request:
    tenant: int
    submit_interval: int


class TaskQueue:
    """Last-in-first-out request queue.

    Requests are kept in per-tenant stacks tagged with a global push sequence
    number, so the distinct tenants can be listed in LIFO order without scanning
    a backlog that grows without bound under always-demand.
    """

    def __init__(self, entries: Iterable[Request] = ()) -> None:
        self._seq = 0
        self._stacks: dict[int, list[tuple[int, Request]]] = {}
        self._size = 0
        for r in entries:
            self.enqueue(r)

    def __len__(self) -> int:
        return self._size

    def __bool__(self) -> bool:
        return self._size > 0

    def __iter__(self) -> Iterator[Request]:
        """Iterate bottom to top (oldest push first)."""
        return iter(self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TaskQueue):
            return NotImplemented
        return self.entries == other.entries

    @property
    def entries(self) -> list[Request]:
        tagged = [item for stack in self._stacks.values() for item in stack]
        tagged.sort(key=lambda item: item[0])
        return [r for _, r in tagged]

    def enqueue(self, request: Request) -> None:
        self._seq += 1
        self._stacks.setdefault(request.tenant, []).append((self._seq, request))
        self._size += 1

    def dequeue(self) -> Request:
        if not self._size:
            raise EmptyQueueError("dequeue from an empty task queue")
        tenant = max(self._stacks, key=lambda t: self._stacks[t][-1][0])
        return self.take(tenant)

    def count(self, tenant: int) -> int:
        stack = self._stacks.get(tenant)
        return len(stack) if stack else 0

    def tenants_lifo(self) -> list[int]:
        """Distinct pending tenants, the one with the most recent request first."""
        return sorted(self._stacks, key=lambda t: -self._stacks[t][-1][0])

    def take(self, tenant: int) -> Request:
        """Remove and return the most recent request of ``tenant``."""
        stack = self._stacks.get(tenant)
        if not stack:
            raise EmptyQueueError(f"no pending request for tenant {tenant}")
        _, request = stack.pop()
        if not stack:
            del self._stacks[tenant]
        self._size -= 1
        return request


@dataclass
class AllocationLedger:
    """Per-tenant credit (sum of granted minus revoked AV) and net allocation count."""

    adjustment_values: dict[int, int]
    credit: dict[int, int] = field(default_factory=dict)
    hmta: dict[int, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for t in self.adjustment_values:
            self.credit.setdefault(t, 0)
            self.hmta.setdefault(t, 0)

    @classmethod
    def for_tenants(cls, tenants: Iterable[TenantProfile]) -> "AllocationLedger":
        return cls({t.id: t.adjustment_value for t in tenants})

    def grant(self, tenant: int) -> None:
        self.credit[tenant] += self.adjustment_values[tenant]
        self.hmta[tenant] += 1

    def revoke(self, tenant: int) -> None:
        if self.hmta[tenant] < 1:
            raise ContractViolation(f"revoke for tenant {tenant} with no outstanding allocation")
        self.credit[tenant] -= self.adjustment_values[tenant]
        self.hmta[tenant] -= 1

    def average_allocations(self, elapsed: int) -> dict[int, Fraction]:
        # Before time advances the average is undefined; raw credit stands in.
        denom = elapsed if elapsed > 0 else 1
        return {t: Fraction(c, denom) for t, c in self.credit.items()}

    def is_consistent(self) -> bool:
        return all(
            self.credit[t] == av * self.hmta[t] and self.credit[t] >= 0
            for t, av in self.adjustment_values.items()
        )


@dataclass
class SimClock:
    interval_length: int
    now: int = 0

    def __post_init__(self) -> None:
        if self.interval_length < 1:
            raise ConfigError("interval_length must be a positive integer")

    @property
    def interval_index(self) -> int:
        return self.now // self.interval_length
