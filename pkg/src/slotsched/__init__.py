"""Deterministic simulator for fair multi-tenant FPGA slot scheduling."""

from .core import (
    AllocationLedger,
    ConfigError,
    ContractViolation,
    EmptyQueueError,
    Request,
    SchedulingError,
    SlotState,
    TaskQueue,
    TenantProfile,
    WorkloadOverflowError,
)
from .energy import EnergyModel, SweepRow, total_energy, tradeoff_sweep
from .engine import POLICIES, Event, EventKind, SimulationTrace, Simulator, Snapshot, make_policy, run_simulation
from .metrics import (
    average_allocation,
    desired_average_allocation,
    desired_hmta,
    desired_total_execution_time,
    fairness_target,
    lcm_of_workloads,
    slot_utilization,
    stfs_average_allocation,
    stfs_target,
    sum_of_differences,
)
from .workload import DemandModel, Scenario, SlotSpec, builtin_benchmarks, fig2_scenario, load_scenario, table2_scenario

__version__ = "0.1.0"
