"""Experiment orchestration: single runs, metrics, traces and parameter sweeps."""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, NamedTuple, Sequence, TextIO

import numpy as np

from .pipeline import TaskSpec, TaskType
from .scenario import ConfigError, Scenario
from .schedulers import Schedule, run_policy

__all__ = [
    "Metrics",
    "TraceRow",
    "RunResult",
    "SweepResult",
    "run",
    "run_stream",
    "sweep",
    "audit_trace",
    "policy_seed",
    "write_trace_csv",
    "metrics_json",
    "write_sweep_csv",
    "TRACE_COLUMNS",
    "SWEEP_AXES",
    "SWEEP_POLICIES",
]

TRACE_COLUMNS = ("task_id", "policy", "E", "P", "s1", "o1", "s2", "o2", "s3", "o3", "accuracy", "gain", "met_deadline")
METRIC_FIELDS = ("total_gain", "completion_rate", "avg_latency", "completed", "arrived")
SWEEP_AXES = ("n_tasks", "arrival_prob")
SWEEP_POLICIES = ("dp", "greedy", "random")

# spawn key separating the random policy's draws from the workload's
_POLICY_STREAM = 1


@dataclass(frozen=True)
class Metrics:
    total_gain: float
    completion_rate: float
    avg_latency: float
    completed: int
    arrived: int

    @classmethod
    def from_trace(cls, trace: Sequence["TraceRow"]) -> "Metrics":
        total = 0.0
        latency = 0.0
        done = 0
        for row in trace:
            total += row.gain
            if row.met_deadline:
                done += 1
                latency += row.o3 - row.arrival
        arrived = len(trace)
        return cls(
            total_gain=total,
            completion_rate=done / arrived if arrived else 0.0,
            avg_latency=latency / done if done else 0.0,
            completed=done,
            arrived=arrived,
        )

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class TraceRow:
    task_id: int
    policy: str
    E: int
    P: int
    s1: float | None
    o1: float | None
    s2: float | None
    o2: float | None
    s3: float | None
    o3: float | None
    accuracy: float
    gain: float
    met_deadline: bool
    # not written to the trace CSV
    arrival: float = 0.0
    deadline_rel: float = 0.0
    task_type: TaskType = TaskType.LEO_IMAGING
    origin: int = 0

    def csv_row(self) -> list[str]:
        def num(x):
            return "" if x is None else repr(float(x))

        return [
            str(self.task_id), self.policy, str(self.E), str(self.P),
            num(self.s1), num(self.o1), num(self.s2), num(self.o2), num(self.s3), num(self.o3),
            num(self.accuracy), num(self.gain), "true" if self.met_deadline else "false",
        ]


class RunResult(NamedTuple):
    metrics: Metrics
    trace: list[TraceRow]
    schedule: Schedule


def policy_seed(seed: int) -> np.random.SeedSequence:
    """Seed of the random policy for a run whose workload uses ``seed``."""
    return np.random.SeedSequence(seed, spawn_key=(_POLICY_STREAM,))


def build_trace(tasks: Sequence[TaskSpec], schedule: Schedule, policy: str) -> list[TraceRow]:
    rows = []
    for task, dec, tl, g in zip(tasks, schedule.decisions, schedule.timelines, schedule.gains):
        common = dict(
            task_id=task.id, policy=policy, E=dec.exit_point, P=dec.partition_point,
            arrival=task.arrival, deadline_rel=task.deadline_rel,
            task_type=task.task_type, origin=task.origin_leo,
        )
        if tl is None:
            rows.append(TraceRow(s1=None, o1=None, s2=None, o2=None, s3=None, o3=None,
                                 accuracy=0.0, gain=0.0, met_deadline=False, **common))
        else:
            rows.append(TraceRow(s1=tl.s1, o1=tl.o1, s2=tl.s2, o2=tl.o2, s3=tl.s3, o3=tl.o3,
                                 accuracy=tl.accuracy, gain=g, met_deadline=tl.meets(task), **common))
    return rows


def run_stream(scenario: Scenario, tasks: Sequence[TaskSpec], policy: str, seed: int) -> RunResult:
    schedule = run_policy(
        policy, tasks, scenario.profile, scenario.link, scenario.gain,
        scenario.slot_len, scenario.accuracy_floor, policy_seed(seed),
    )
    trace = build_trace(tasks, schedule, policy)
    return RunResult(Metrics.from_trace(trace), trace, schedule)


def run(scenario: Scenario, policy: str | None = None) -> RunResult:
    """Generate (or take) the scenario's stream and run one policy over it."""
    return run_stream(scenario, scenario.stream(), policy or scenario.policy, scenario.seed)


def audit_trace(trace: Sequence[TraceRow]) -> dict[str, int]:
    """Count deadline misses and overlapping busy intervals in a trace."""
    late = 0
    heo: list[tuple[float, float]] = []
    leo: dict[int, list[tuple[float, float]]] = {}
    for row in trace:
        if row.o3 is None:
            continue
        if row.o3 > row.arrival + row.deadline_rel:
            late += 1
        if row.o2 > row.s2:
            heo.append((row.s2, row.o2))
        if row.o1 > row.s1:
            leo.setdefault(row.origin, []).append((row.s1, row.o1))
        if row.o3 > row.s3:
            leo.setdefault(row.origin, []).append((row.s3, row.o3))

    def overlaps(intervals):
        intervals = sorted(intervals)
        return sum(b[0] < a[1] for a, b in zip(intervals, intervals[1:]))

    return {
        "deadline_violations": late,
        "heo_overlaps": overlaps(heo),
        "leo_overlaps": sum(overlaps(v) for v in leo.values()),
    }


# -- sweeps -------------------------------------------------------------------


@dataclass
class SweepResult:
    axis: str
    values: list[float]
    policies: tuple[str, ...]
    replications: int
    runs: dict[tuple[float, str], list[Metrics]]
    audits: dict[tuple[float, str], list[dict[str, int]]] = field(default_factory=dict)

    def stat(self, value: float, policy: str, metric: str) -> tuple[float, float]:
        xs = np.array([getattr(m, metric) for m in self.runs[(value, policy)]], dtype=float)
        std = float(xs.std(ddof=1)) if len(xs) > 1 else 0.0
        return float(xs.mean()), std

    def means(self, policy: str, metric: str = "total_gain") -> list[float]:
        return [self.stat(v, policy, metric)[0] for v in self.values]

    @property
    def points(self) -> list[tuple[float, dict[str, dict[str, Metrics]]]]:
        out = []
        for v in self.values:
            per = {}
            for p in self.policies:
                stats = {m: self.stat(v, p, m) for m in METRIC_FIELDS}
                per[p] = {
                    "mean": Metrics(**{m: s[0] for m, s in stats.items()}),
                    "std": Metrics(**{m: s[1] for m, s in stats.items()}),
                }
            out.append((v, per))
        return out


def _sweep_job(args):
    scenario, axis, value, rep, policies = args
    sc = scenario.with_changes(**{axis: value, "seed": scenario.seed + rep})
    tasks = sc.stream()
    out = {}
    for p in policies:
        res = run_stream(sc, tasks, p, sc.seed)
        out[p] = (res.metrics, audit_trace(res.trace))
    return (value, rep), out


def _worker_count(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    try:
        return max(1, int(os.environ.get("ORBIT_SIM_THREADS", "1")))
    except ValueError:
        return 1


def sweep(
    scenario: Scenario,
    axis: str,
    values: Iterable[float],
    replications: int,
    policies: Sequence[str] = SWEEP_POLICIES,
    workers: int | None = None,
) -> SweepResult:
    """Run every (axis value, replication, policy) combination.

    Replication ``r`` uses workload seed ``scenario.seed + r`` at every axis
    value, and all policies in a replication see the same stream. Results do
    not depend on ``workers`` (default: ``$ORBIT_SIM_THREADS`` or 1).
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"axis: must be one of {SWEEP_AXES}, got {axis!r}")
    if replications < 1:
        raise ConfigError("replications: must be >= 1")
    if scenario.tasks is not None:
        raise ConfigError("tasks: a sweep needs a generated workload, not an explicit stream")
    kind = int if axis == "n_tasks" else float
    values = [kind(v) for v in values]
    if not values:
        raise ConfigError("values: need at least one sweep value")
    jobs = [(scenario, axis, v, r, tuple(policies)) for v in values for r in range(replications)]

    n_workers = _worker_count(workers)
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_sweep_job, jobs))
    else:
        results = [_sweep_job(j) for j in jobs]
    results.sort(key=lambda kv: (values.index(kv[0][0]), kv[0][1]))

    runs: dict[tuple[float, str], list[Metrics]] = {(v, p): [] for v in values for p in policies}
    audits: dict[tuple[float, str], list[dict[str, int]]] = {(v, p): [] for v in values for p in policies}
    for (value, _), per in results:
        for p, (metrics, audit) in per.items():
            runs[(value, p)].append(metrics)
            audits[(value, p)].append(audit)
    return SweepResult(axis, values, tuple(policies), replications, runs, audits)


# -- file formats ---------------------------------------------------------------


def write_trace_csv(trace: Iterable[TraceRow], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for row in trace:
        writer.writerow(row.csv_row())


def metrics_json(metrics: Metrics) -> str:
    return json.dumps(metrics.to_dict(), indent=2, sort_keys=True) + "\n"


def write_sweep_csv(result: SweepResult, fh: TextIO) -> None:
    """One row per (axis value, policy, statistic)."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(("axis", "value", "policy", "statistic", *METRIC_FIELDS))
    for value, per in result.points:
        for policy in result.policies:
            for stat in ("mean", "std"):
                m = per[policy][stat]
                writer.writerow([result.axis, repr(value), policy, stat, *(repr(float(getattr(m, f))) for f in METRIC_FIELDS)])


def margin_pct(a: float, b: float) -> float:
    """Relative improvement of ``a`` over ``b`` in percent."""
    return 100.0 * (a - b) / b if b else math.inf
