from fractions import Fraction

import pytest

from slotsched.core import (
    AllocationLedger,
    ConfigError,
    ContractViolation,
    EmptyQueueError,
    Request,
    SimClock,
    SlotState,
    TaskQueue,
    TenantProfile,
    check_u64,
    WorkloadOverflowError,
)


def test_tenant_profile_adjustment_value():
    assert TenantProfile(0, "AES", 2, 7).adjustment_value == 14


@pytest.mark.parametrize("area,ct", [(0, 1), (1, 0), (-3, 2)])
def test_tenant_profile_rejects_non_positive(area, ct):
    with pytest.raises(ConfigError):
        TenantProfile(0, "X", area, ct)


def test_slot_fits():
    slot = SlotState(0, 4)
    assert slot.fits(TenantProfile(0, "a", 4, 1))
    assert not slot.fits(TenantProfile(1, "b", 5, 1))
    assert slot.is_free


def test_queue_is_lifo():
    q = TaskQueue()
    for t in (0, 1, 2):
        q.enqueue(Request(t, 0))
    assert [q.dequeue().tenant for _ in range(3)] == [2, 1, 0]
    with pytest.raises(EmptyQueueError):
        q.dequeue()


def test_queue_tenants_lifo_and_take():
    q = TaskQueue([Request(0, 0), Request(1, 0), Request(0, 1)])
    assert q.tenants_lifo() == [0, 1]
    assert q.take(0) == Request(0, 1)
    assert q.tenants_lifo() == [1, 0]
    assert q.count(0) == 1 and len(q) == 2
    with pytest.raises(EmptyQueueError):
        q.take(5)


def test_queue_entries_roundtrip():
    reqs = [Request(2, 0), Request(0, 0), Request(2, 1)]
    q = TaskQueue(reqs)
    assert q.entries == reqs
    assert TaskQueue(q.entries) == q


def test_ledger_grant_revoke():
    ledger = AllocationLedger({0: 6, 1: 9})
    ledger.grant(0)
    ledger.grant(0)
    ledger.revoke(0)
    assert ledger.credit == {0: 6, 1: 0}
    assert ledger.hmta == {0: 1, 1: 0}
    assert ledger.is_consistent()
    with pytest.raises(ContractViolation):
        ledger.revoke(1)


def test_ledger_average_uses_raw_credit_at_time_zero():
    ledger = AllocationLedger({0: 6})
    ledger.grant(0)
    assert ledger.average_allocations(0) == {0: 6}
    assert ledger.average_allocations(3) == {0: Fraction(2)}


def test_clock_interval_index():
    clock = SimClock(36, now=72)
    assert clock.interval_index == 2
    with pytest.raises(ConfigError):
        SimClock(0)


def test_check_u64():
    assert check_u64(2**64 - 1, "x") == 2**64 - 1
    with pytest.raises(WorkloadOverflowError):
        check_u64(2**64, "x")
