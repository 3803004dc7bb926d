"""Command-line front end."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .core import ConfigError, ContractViolation, SchedulingError
from .energy import EnergyModel, total_energy, tradeoff_sweep, write_sweep_csv
from .engine import (
    POLICIES,
    Event,
    EventKind,
    SimulationTrace,
    run_simulation,
    sod_exact,
    write_snapshots_csv,
    write_trace_csv,
)
from .metrics import busy_units_from_events, fairness_target, render, running_total_execution_time
from .workload import Scenario, load_scenario, scenario_from_dict, table2_scenario

EXIT_OK, EXIT_MISMATCH, EXIT_CONFIG, EXIT_CONTRACT = 0, 1, 2, 3


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_scenario(args: argparse.Namespace) -> Scenario:
    if args.config:
        scenario = load_scenario(args.config)
    else:
        scenario = table2_scenario(
            slots=args.slots or (4, 10, 18),
            demand=args.demand or "always",
        )
    changes = {}
    if args.interval is not None:
        changes["interval_length"] = args.interval
    if args.horizon is not None:
        changes["horizon"] = args.horizon
    if args.seed is not None:
        changes["demand"] = dataclasses.replace(scenario.demand, seed=args.seed)
    return scenario.replace(**changes) if changes else scenario


def _fraction_pair(value: Fraction) -> dict[str, str]:
    return {"exact": str(value), "value": render(value)}


def report_dict(trace: SimulationTrace, seconds: float) -> dict:
    sc, final = trace.scenario, trace.final
    return {
        "policy": trace.policy,
        "scenario_digest": sc.digest(),
        "request_digest": trace.request_digest,
        "seed": sc.demand.seed,
        "horizon": sc.horizon,
        "interval_length": sc.interval_length,
        "desired_avg_allocation": _fraction_pair(trace.desired),
        "sod": _fraction_pair(final.sod),
        "avg_alloc": {sc.tenants[t].name: _fraction_pair(a) for t, a in final.avg_alloc.items()},
        "pr_count": final.pr_count,
        "energy_mj": _fraction_pair(final.energy_mj),
        "utilization": _fraction_pair(final.utilization),
        "wall_clock_s": round(seconds, 3),
        "scenario": sc.to_dict(),
    }


def _run_one(scenario: Scenario, policy: str, out: Path) -> SimulationTrace:
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    trace = run_simulation(scenario, policy)
    seconds = time.perf_counter() - start
    write_trace_csv(trace, out / "trace.csv")
    write_snapshots_csv(trace, out / "snapshots.csv")
    (out / "report.json").write_text(json.dumps(report_dict(trace, seconds), indent=2) + "\n", encoding="utf-8")
    return trace


def cmd_run(args: argparse.Namespace) -> int:
    scenario = build_scenario(args)
    trace = _run_one(scenario, args.policy, Path(args.out))
    f = trace.final
    print(
        f"{trace.policy}: sod={render(f.sod)} pr={f.pr_count} energy_mj={render(f.energy_mj)} "
        f"utilization={render(f.utilization)} -> {args.out}"
    )
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    scenario = build_scenario(args)
    out = Path(args.out)
    traces = {p: _run_one(scenario, p, out / p) for p in args.policies}
    with open(out / "compare.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["policy", "sod", "pr_count", "energy_mj", "utilization"])
        for p, tr in traces.items():
            f = tr.final
            w.writerow([p, render(f.sod, 6), f.pr_count, render(f.energy_mj, 6), render(f.utilization, 6)])
            print(f"{p:>7}  sod={render(f.sod)}  pr={f.pr_count}  energy_mj={render(f.energy_mj)}")
    with open(out / "sod_series.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["interval", *traces])
        series = [tr.snapshots for tr in traces.values()]
        for row in zip(*series):
            w.writerow([row[0].interval, *(render(s.sod, 6) for s in row)])
    return EXIT_OK


GNUPLOT = """set datafile separator ','
set key autotitle columnhead
set logscale x 2
set xlabel 'interval length'
set ylabel 'SOD'
set y2label 'PR energy (mJ)'
set y2tics
set terminal pngcairo size 900,500
set output 'sweep.png'
plot 'sweep.csv' using 1:2 with linespoints axes x1y1, '' using 1:3 with linespoints axes x1y2
"""


def cmd_sweep(args: argparse.Namespace) -> int:
    scenario = build_scenario(args)
    rows = tradeoff_sweep(scenario, args.policy, args.intervals, workers=args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(rows, out / "sweep.csv")
    if args.gnuplot:
        (out / "sweep.gp").write_text(GNUPLOT, encoding="utf-8")
    for r in rows:
        print(f"interval={r.interval:>4}  sod={render(r.sod)}  pr={r.pr_count}  energy_mj={render(r.energy_mj)}")
    return EXIT_OK


def read_trace_csv(path: Path, scenario: Scenario) -> list[Event]:
    ids = {t.name: t.id for t in scenario.tenants}
    events = []
    with open(path, newline="", encoding="utf-8") as fh:
        for line, row in enumerate(csv.DictReader(fh), start=2):
            try:
                tenant = ids[row["tenant"]] if row["tenant"] else None
                events.append(Event(int(row["time"]), int(row["slot"]), EventKind(row["event"]), tenant))
            except (KeyError, ValueError, TypeError) as exc:
                raise ConfigError(f"{path.name} line {line}: unreadable row ({exc})") from None
    return events


def recompute(events: Sequence[Event], scenario: Scenario) -> dict[str, Fraction | int]:
    """SOD, energy, PR count and utilization from the event log alone."""
    hmta = {t.id: 0 for t in scenario.tenants}
    for e in events:
        if e.kind == EventKind.ASSIGN:
            hmta[e.tenant] += 1
        elif e.kind == EventKind.PREEMPT:
            hmta[e.tenant] -= 1
    credits = [t.adjustment_value * hmta[t.id] for t in scenario.tenants]
    desired = fairness_target(scenario.tenants, scenario.slot_count).desired_avg_allocation
    tet = running_total_execution_time(scenario.tenants, hmta)
    busy = busy_units_from_events(events, scenario.slot_count, scenario.horizon)
    return {
        "sod": sod_exact(credits, tet, scenario.slot_count, desired),
        "energy_mj": total_energy(events, EnergyModel.from_scenario(scenario)),
        "pr_count": sum(1 for e in events if e.kind == EventKind.PR),
        "utilization": Fraction(busy, scenario.slot_count * scenario.horizon),
    }


def cmd_verify(args: argparse.Namespace) -> int:
    run_dir = Path(args.run_dir)
    report = json.loads((run_dir / "report.json").read_text(encoding="utf-8"))
    scenario = scenario_from_dict(report["scenario"])
    found = recompute(read_trace_csv(run_dir / "trace.csv", scenario), scenario)
    expected = {
        "sod": Fraction(report["sod"]["exact"]),
        "energy_mj": Fraction(report["energy_mj"]["exact"]),
        "pr_count": report["pr_count"],
        "utilization": Fraction(report["utilization"]["exact"]),
    }
    bad = [k for k in expected if expected[k] != found[k]]
    for k in expected:
        print(f"{k:>12}: report={expected[k]} trace={found[k]} {'MISMATCH' if k in bad else 'ok'}")
    return EXIT_MISMATCH if bad else EXIT_OK


def cmd_targets(args: argparse.Namespace) -> int:
    scenario = build_scenario(args)
    target = fairness_target(scenario.tenants, scenario.slot_count)
    print(f"lcm_workload: {target.lcm_workload}")
    for t in scenario.tenants:
        print(f"desired_hmta[{t.name}]: {target.desired_hmta[t.id]}")
    print(f"desired_total_execution_time: {target.desired_total_execution_time}")
    print(f"desired_avg_allocation (1 slot): {target.desired_avg_allocation_single_slot} "
          f"= {render(target.desired_avg_allocation_single_slot)}")
    print(f"desired_avg_allocation ({target.slot_count} slots): {target.desired_avg_allocation} "
          f"= {render(target.desired_avg_allocation)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slotsched", description="Fair multi-tenant FPGA slot scheduling simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    def scenario_args(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="scenario JSON; defaults to the eight built-in benchmarks")
        p.add_argument("--slots", type=_int_list, help="slot capacities for the built-in scenario, e.g. 17,17")
        p.add_argument("--demand", choices=["always", "random"], help="demand model for the built-in scenario")
        p.add_argument("--interval", type=int, help="interval length in base time units")
        p.add_argument("--horizon", type=int, help="simulated time units")
        p.add_argument("--seed", type=int, help="random-demand seed")

    p = sub.add_parser("run", help="simulate one policy and write trace, snapshots and report")
    scenario_args(p)
    p.add_argument("--policy", default="themis")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run several policies on the same scenario")
    scenario_args(p)
    p.add_argument("--policies", type=lambda s: [x for x in s.split(",") if x], default=list(POLICIES))
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("sweep", help="final SOD and PR energy across interval lengths")
    scenario_args(p)
    p.add_argument("--policy", default="themis")
    p.add_argument("--intervals", type=_int_list, default=[1, 2, 4, 8, 16, 32, 64])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--gnuplot", action="store_true", help="also write a gnuplot script next to sweep.csv")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="recompute report metrics from a run directory's trace.csv")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("targets", help="print the closed-form fairness targets")
    scenario_args(p)
    p.set_defaults(func=cmd_targets)
    return parser


def _check_policies(args: argparse.Namespace) -> None:
    names = list(getattr(args, "policies", None) or []) + ([args.policy] if hasattr(args, "policy") else [])
    for name in names:
        if name not in POLICIES:
            raise ConfigError(f"unknown policy {name!r}; valid policies: {', '.join(POLICIES)}")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        _check_policies(args)
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT
    except (SchedulingError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
