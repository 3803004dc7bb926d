"""Closed-form fairness targets, average allocation, SOD and slot utilization.

All targets are exact: integers or :class:`fractions.Fraction`. Floats only
appear when a caller renders a report.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from .core import ConfigError, TenantProfile, check_u64


@dataclass(frozen=True)
class FairnessTarget:
    lcm_workload: int
    desired_hmta: dict[int, int]
    desired_total_execution_time: int
    desired_avg_allocation_single_slot: Fraction
    desired_avg_allocation: Fraction
    slot_count: int


@dataclass(frozen=True)
class StfsTarget:
    desired_avg_allocation: Fraction
    nti: int
    desired_hmta: dict[int, int]


def _lcm_fold(values: Sequence[int], what: str) -> int:
    if not values:
        raise ConfigError(f"{what}: at least one tenant is required")
    acc = 1
    for v in values:
        if v < 1:
            raise ConfigError(f"{what}: values must be positive, got {v}")
        acc = check_u64(acc // gcd(acc, v) * v, what)
    return acc


def lcm_of_workloads(tenants: Sequence[TenantProfile]) -> int:
    """LCM of every tenant's area x comp_time product."""
    return _lcm_fold([t.adjustment_value for t in tenants], "lcm_of_workloads")


def desired_hmta(tenants: Sequence[TenantProfile]) -> dict[int, int]:
    lcm = lcm_of_workloads(tenants)
    return {t.id: lcm // t.adjustment_value for t in tenants}


def desired_total_execution_time(tenants: Sequence[TenantProfile]) -> int:
    hmta = desired_hmta(tenants)
    total = 0
    for t in tenants:
        total = check_u64(total + t.comp_time * hmta[t.id], "desired_total_execution_time")
    return total


def desired_average_allocation(tenants: Sequence[TenantProfile], slot_count: int = 1) -> Fraction:
    if slot_count < 1:
        raise ConfigError("slot_count must be >= 1")
    return Fraction(lcm_of_workloads(tenants), desired_total_execution_time(tenants)) * slot_count


def fairness_target(tenants: Sequence[TenantProfile], slot_count: int) -> FairnessTarget:
    single = desired_average_allocation(tenants, 1)
    return FairnessTarget(
        lcm_workload=lcm_of_workloads(tenants),
        desired_hmta=desired_hmta(tenants),
        desired_total_execution_time=desired_total_execution_time(tenants),
        desired_avg_allocation_single_slot=single,
        desired_avg_allocation=single * slot_count,
        slot_count=slot_count,
    )


def stfs_desired_allocation(total_pr_area: int, tenant_count: int) -> Fraction:
    if tenant_count < 1:
        raise ConfigError("tenant_count must be >= 1")
    return Fraction(total_pr_area, tenant_count)


def stfs_average_allocation(area: int, hmta: int, nti: int) -> Fraction:
    if nti < 1:
        raise ConfigError("nti must be >= 1")
    return Fraction(area * hmta, nti)


def stfs_target(tenants: Sequence[TenantProfile], total_pr_area: int) -> StfsTarget:
    """Area-only target: HMTA from the LCM of areas, NTI = sum of those HMTAs."""
    lcm = _lcm_fold([t.area for t in tenants], "stfs_target")
    hmta = {t.id: lcm // t.area for t in tenants}
    return StfsTarget(
        desired_avg_allocation=stfs_desired_allocation(total_pr_area, len(tenants)),
        nti=sum(hmta.values()),
        desired_hmta=hmta,
    )


def average_allocation(credit: int, elapsed: int) -> Fraction:
    if elapsed < 1:
        raise ConfigError("elapsed must be >= 1; use raw credit before time advances")
    return Fraction(credit, elapsed)


def running_total_execution_time(tenants: Sequence[TenantProfile], hmta: Mapping[int, int]) -> int:
    """Sum of comp_time x net allocation count, the running counterpart of the desired value."""
    return sum(t.comp_time * hmta[t.id] for t in tenants)


def slot_average_allocations(
    tenants: Sequence[TenantProfile], credit: Mapping[int, int], hmta: Mapping[int, int], slot_count: int
) -> dict[int, Fraction]:
    """Average allocation of every tenant, on the same per-slot scale as the desired target.

    The running execution time is spread over ``slot_count`` slots, so an
    allocation history matching the desired HMTA lands exactly on
    ``desired_average_allocation(tenants, slot_count)``. Before any work has
    been granted every allocation is 0.
    """
    tet = running_total_execution_time(tenants, hmta)
    if tet == 0:
        return {t.id: Fraction(0) for t in tenants}
    return {t.id: average_allocation(credit[t.id] * slot_count, tet) for t in tenants}


def sum_of_differences(avg_allocs: Mapping[int, Fraction], desired: Fraction) -> Fraction:
    return sum((abs(Fraction(a) - desired) for a in avg_allocs.values()), Fraction(0))


def busy_units_from_events(events, slot_count: int, horizon: int) -> int:
    """Replay ASSIGN/COMPLETE/PREEMPT events into total busy slot-time."""
    started: dict[int, int] = {}
    busy = 0
    for ev in events:
        kind = ev.kind
        if kind == "ASSIGN":
            started[ev.slot] = ev.time
        elif kind in ("COMPLETE", "PREEMPT"):
            start = started.pop(ev.slot, None)
            if start is not None:
                busy += ev.time - start
    for start in started.values():
        busy += max(0, horizon - start)
    return busy


def slot_utilization(trace) -> Fraction:
    """Busy slot-time over slot_count x horizon, replayed from the event log."""
    if trace.horizon < 1:
        raise ConfigError("trace horizon must be positive")
    busy = busy_units_from_events(trace.events, trace.slot_count, trace.horizon)
    return Fraction(busy, trace.slot_count * trace.horizon)


def render(value: Fraction, places: int = 4) -> str:
    """Fixed-point decimal with round-half-to-even at ``places`` digits."""
    scale = 10**places
    q = round(Fraction(value) * scale)  # Fraction.__round__ is half-to-even
    sign = "-" if q < 0 else ""
    q = abs(q)
    return f"{sign}{q // scale}.{q % scale:0{places}d}"
