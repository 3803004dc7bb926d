"""Benchmark catalog, scenario loading and demand generation."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .core import ConfigError, Request, TenantProfile, U64_MAX

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MASK = U64_MAX

# (name, area, comp_time) as profiled for the MachSuite IPs.
BENCHMARKS: tuple[tuple[str, int, int], ...] = (
    ("AES", 2, 7),
    ("FFT", 17, 5),
    ("SHA", 6, 8),
    ("BFS", 12, 15),
    ("KMP", 3, 9),
    ("GEMM", 14, 28),
    ("SORT", 1, 14),
    ("SPMV", 5, 14),
)

DEFAULT_SLOTS: tuple[tuple[int, int], ...] = ((4, 1180), (10, 1340), (18, 837))
DEFAULT_ENERGY_MJ = Fraction(5, 4)
DEFAULT_PROBABILITIES = (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))


def builtin_benchmarks() -> list[TenantProfile]:
    return [TenantProfile(i, name, area, ct) for i, (name, area, ct) in enumerate(BENCHMARKS)]


def splitmix_next(state: int) -> tuple[int, int]:
    """One SplitMix64 step: returns (output, new_state)."""
    state = (state + GOLDEN_GAMMA) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31), state


def _below(state: int, n: int) -> tuple[int, int]:
    """Uniform integer in [0, n) by rejection sampling."""
    limit = (1 << 64) - ((1 << 64) % n)
    while True:
        value, state = splitmix_next(state)
        if value < limit:
            return value % n, state


@dataclass(frozen=True)
class DemandModel:
    kind: str
    order: tuple[int, ...]
    seed: int = 0
    p0: Fraction = DEFAULT_PROBABILITIES[0]
    p1: Fraction = DEFAULT_PROBABILITIES[1]
    p2: Fraction = DEFAULT_PROBABILITIES[2]

    def __post_init__(self) -> None:
        if self.kind not in ("always", "random"):
            raise ConfigError(f"demand.kind must be 'always' or 'random', got {self.kind!r}")
        if not 0 <= self.seed <= U64_MAX:
            raise ConfigError("demand.seed must be a 64-bit unsigned integer")
        if len(set(self.order)) != len(self.order):
            raise ConfigError("demand.order must not repeat a tenant")
        for name in ("p0", "p1", "p2"):
            p = getattr(self, name)
            if not 0 <= p <= 1:
                raise ConfigError(f"demand.{name} must lie in [0, 1]")
        if self.p0 + self.p1 + self.p2 != 1:
            raise ConfigError("demand.p0 + p1 + p2 must equal 1 exactly")

    @classmethod
    def always(cls, order: Sequence[int]) -> "DemandModel":
        return cls("always", tuple(order))

    @classmethod
    def random(cls, order: Sequence[int], seed: int, p: Sequence[Any] = DEFAULT_PROBABILITIES) -> "DemandModel":
        p0, p1, p2 = (Fraction(x) for x in p)
        return cls("random", tuple(order), seed, p0, p1, p2)


def generate_demands(
    model: DemandModel, tenants: Sequence[TenantProfile], interval_index: int, rng_state: int
) -> tuple[list[Request], int]:
    """Requests submitted at one interval boundary, in submission order."""
    if model.kind == "always":
        return [Request(t, interval_index) for t in model.order], rng_state

    # Fisher-Yates shuffle of the visiting order.
    visit = list(model.order)
    for i in range(len(visit) - 1, 0, -1):
        j, rng_state = _below(rng_state, i + 1)
        visit[i], visit[j] = visit[j], visit[i]

    cut0 = model.p0 * (1 << 64)
    cut1 = (model.p0 + model.p1) * (1 << 64)
    requests = []
    for t in visit:
        x, rng_state = splitmix_next(rng_state)
        k = 0 if x < cut0 else (1 if x < cut1 else 2)
        requests.extend(Request(t, interval_index) for _ in range(k))
    return requests, rng_state


@dataclass(frozen=True)
class SlotSpec:
    capacity: int
    bitstream_kb: int
    energy_mj: Fraction = DEFAULT_ENERGY_MJ


@dataclass(frozen=True)
class Scenario:
    tenants: tuple[TenantProfile, ...]
    slots: tuple[SlotSpec, ...]
    interval_length: int
    horizon: int
    demand: DemandModel
    pr_latency: int = 0
    kb_scaling: bool = False
    extra: Mapping[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self) -> None:
        if not self.tenants:
            raise ConfigError("tenants: at least one tenant is required")
        if not self.slots:
            raise ConfigError("slots: at least one slot is required")
        names = [t.name for t in self.tenants]
        if len(set(names)) != len(names):
            raise ConfigError("tenants: names must be unique")
        if [t.id for t in self.tenants] != list(range(len(self.tenants))):
            raise ConfigError("tenants: ids must be 0..n-1 in order")
        for s in self.slots:
            if s.capacity < 1 or s.bitstream_kb < 1 or s.energy_mj <= 0:
                raise ConfigError("slots: capacity, bitstream_kb and energy_mj must be positive")
        if self.interval_length < 1:
            raise ConfigError("interval_length must be a positive integer")
        if self.horizon < self.interval_length:
            raise ConfigError("horizon must be >= interval_length")
        if self.pr_latency < 0:
            raise ConfigError("pr_latency must be >= 0")
        biggest = max(self.tenants, key=lambda t: t.area)
        if biggest.area > max(s.capacity for s in self.slots):
            raise ConfigError(
                f"tenants: {biggest.name} (area {biggest.area}) fits no slot; "
                f"largest capacity is {max(s.capacity for s in self.slots)}"
            )
        if sorted(self.demand.order) != list(range(len(self.tenants))):
            raise ConfigError("demand.order must list every tenant exactly once")

    @property
    def slot_count(self) -> int:
        return len(self.slots)

    @property
    def max_comp_time(self) -> int:
        return max(t.comp_time for t in self.tenants)

    def tenant_by_name(self, name: str) -> TenantProfile:
        for t in self.tenants:
            if t.name == name:
                return t
        raise ConfigError(f"unknown tenant {name!r}")

    def replace(self, **changes: Any) -> "Scenario":
        from dataclasses import replace

        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        d = self.demand
        demand: dict[str, Any] = {"kind": d.kind, "order": [self.tenants[t].name for t in d.order]}
        if d.kind == "random":
            demand.update(seed=d.seed, p0=str(d.p0), p1=str(d.p1), p2=str(d.p2))
        out: dict[str, Any] = {
            "tenants": [{"name": t.name, "area": t.area, "comp_time": t.comp_time} for t in self.tenants],
            "slots": [
                {"capacity": s.capacity, "bitstream_kb": s.bitstream_kb, "energy_mj": str(s.energy_mj)}
                for s in self.slots
            ],
            "interval_length": self.interval_length,
            "horizon": self.horizon,
            "demand": demand,
        }
        if self.pr_latency:
            out["pr_latency"] = self.pr_latency
        if self.kb_scaling:
            out["kb_scaling"] = True
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


_TOP_KEYS = {"tenants", "slots", "interval_length", "horizon", "demand", "pr_latency", "kb_scaling"}
_TENANT_KEYS = {"name", "area", "comp_time"}
_SLOT_KEYS = {"capacity", "bitstream_kb", "energy_mj"}
_DEMAND_KEYS = {"kind", "order", "seed", "p0", "p1", "p2"}


def _reject_unknown(obj: Any, allowed: set[str], where: str) -> None:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object")
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}: unknown key")


def _int(obj: Mapping[str, Any], key: str, where: str) -> int:
    if key not in obj:
        raise ConfigError(f"{where}.{key}: missing")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
    return v


def _fraction(v: Any, where: str) -> Fraction:
    if isinstance(v, bool):
        raise ConfigError(f"{where}: expected a number")
    try:
        # str() keeps 0.25 exact instead of inheriting binary float error.
        return Fraction(str(v)) if isinstance(v, float) else Fraction(v)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"{where}: not a rational number: {v!r}") from exc


def scenario_from_dict(doc: Mapping[str, Any]) -> Scenario:
    _reject_unknown(doc, _TOP_KEYS, "config")
    raw_tenants = doc.get("tenants")
    if not isinstance(raw_tenants, list) or not raw_tenants:
        raise ConfigError("config.tenants: expected a non-empty list")
    tenants = []
    for i, t in enumerate(raw_tenants):
        where = f"tenants[{i}]"
        _reject_unknown(t, _TENANT_KEYS, where)
        if not isinstance(t.get("name"), str):
            raise ConfigError(f"{where}.name: expected a string")
        tenants.append(TenantProfile(i, t["name"], _int(t, "area", where), _int(t, "comp_time", where)))

    raw_slots = doc.get("slots")
    if not isinstance(raw_slots, list) or not raw_slots:
        raise ConfigError("config.slots: expected a non-empty list")
    slots = []
    for i, s in enumerate(raw_slots):
        where = f"slots[{i}]"
        _reject_unknown(s, _SLOT_KEYS, where)
        energy = _fraction(s.get("energy_mj", DEFAULT_ENERGY_MJ), f"{where}.energy_mj")
        slots.append(SlotSpec(_int(s, "capacity", where), _int(s, "bitstream_kb", where), energy))

    raw_demand = doc.get("demand", {"kind": "always"})
    _reject_unknown(raw_demand, _DEMAND_KEYS, "demand")
    names = {t.name: t.id for t in tenants}
    order_names = raw_demand.get("order", [t.name for t in tenants])
    if not isinstance(order_names, list):
        raise ConfigError("demand.order: expected a list of tenant names")
    try:
        order = tuple(names[n] for n in order_names)
    except KeyError as exc:
        raise ConfigError(f"demand.order: unknown tenant {exc.args[0]!r}") from None
    kind = raw_demand.get("kind", "always")
    if kind == "random":
        p = tuple(
            _fraction(raw_demand.get(k, DEFAULT_PROBABILITIES[i]), f"demand.{k}")
            for i, k in enumerate(("p0", "p1", "p2"))
        )
        seed = raw_demand.get("seed", 0)
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError("demand.seed: expected an integer")
        demand = DemandModel("random", order, seed, *p)
    else:
        demand = DemandModel(kind, order)

    kb_scaling = doc.get("kb_scaling", False)
    if not isinstance(kb_scaling, bool):
        raise ConfigError("config.kb_scaling: expected a boolean")
    return Scenario(
        tenants=tuple(tenants),
        slots=tuple(slots),
        interval_length=_int(doc, "interval_length", "config"),
        horizon=_int(doc, "horizon", "config"),
        demand=demand,
        pr_latency=_int(doc, "pr_latency", "config") if "pr_latency" in doc else 0,
        kb_scaling=kb_scaling,
    )


def load_scenario(path: str | Path) -> Scenario:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from exc
    return scenario_from_dict(doc)


def table2_scenario(
    slots: Sequence[int] = (4, 10, 18),
    interval_length: int = 36,
    horizon: int = 20_000,
    demand: str = "always",
    seed: int = 42,
) -> Scenario:
    """The eight benchmarks on the given slot capacities."""
    tenants = tuple(builtin_benchmarks())
    kbs = dict(DEFAULT_SLOTS)
    specs = tuple(SlotSpec(c, kbs.get(c, 1000)) for c in slots)
    order = [t.id for t in tenants]
    model = DemandModel.always(order) if demand == "always" else DemandModel.random(order, seed)
    return Scenario(tenants, specs, interval_length, horizon, model)


def fig2_scenario(horizon: int = 12) -> Scenario:
    """Three tenants on a 2-unit and a 3-unit slot, scheduled every time unit."""
    tenants = (TenantProfile(0, "AES", 2, 3), TenantProfile(1, "FFT", 3, 3), TenantProfile(2, "SHA", 1, 4))
    slots = (SlotSpec(2, 1), SlotSpec(3, 1))
    return Scenario(tenants, slots, 1, horizon, DemandModel.always((0, 1, 2)))
