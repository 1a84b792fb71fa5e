"""Decision policies for a task stream.

All policies share one execution model, the *slotted serial system*: time is
cut into slots of ``slot_len`` seconds, tasks are served one at a time in
arrival order, and a task that starts at slot ``t`` with a queue-free
pipeline time of ``d`` seconds holds the system until slot
``t + slots_needed(d)``. A task counts only if it ends on or before its
deadline slot (deadline rounded down to the slot grid).

Every schedule is then replayed through the continuous FCFS pipeline to get
real timelines. A slotted-feasible schedule can only finish earlier when
replayed, so replay never drops a task that the slotted model accepted; it
still re-checks every deadline and demotes any violation to skip.

Policies:

``dp_decide``
    Offline gain-aware dynamic program over (task, end slot).
``greedy_decide``
    Online; deepest exit that still meets the deadline given the live state.
``random_decide``
    Online; uniform draw over skip and every (exit, partition) pair.
``brute_force_oracle``
    Exhaustive enumeration for small instances; reference for ``dp_decide``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .gain import GainParams, task_gain
from .link import LinkParams
from .pipeline import (
    SKIP,
    Decision,
    QueueState,
    TaskSpec,
    TaskTimeline,
    arrival_slot,
    ceil_slot,
    commit,
    deadline_slot,
    pipeline_time,
    schedule_task,
    slots_needed,
)
from .profile import ModelProfile

__all__ = [
    "Option",
    "DpTable",
    "Schedule",
    "InstanceTooLargeError",
    "task_options",
    "build_dp_table",
    "dp_decide",
    "select_points",
    "greedy_decide",
    "random_decide",
    "brute_force_oracle",
    "replay",
    "POLICIES",
    "run_policy",
]

ORACLE_MAX_TASKS = 6
ORACLE_MAX_OPTIONS = 12


class InstanceTooLargeError(ValueError):
    """The instance exceeds the exhaustive oracle's guard rails."""


@dataclass(frozen=True)
class Option:
    """One (exit, partition) choice for one task, priced on the slot grid."""

    decision: Decision
    accuracy: float
    gain: float
    duration: float
    slots: int

    @property
    def sort_key(self):
        # accuracy desc, completion asc, E asc, P asc
        return (-self.accuracy, self.duration, self.decision.exit_point, self.decision.partition_point)


@dataclass
class DpTable:
    """Gain table ``values[i, j]``: best gain of the first ``i`` tasks, all done by slot ``j``.

    ``take_*`` record, for each task row and end slot, the best way of running
    that task to end exactly there (value, start slot, option index).
    """

    values: np.ndarray
    take_value: np.ndarray
    take_start: np.ndarray
    take_option: np.ndarray


@dataclass
class Schedule:
    decisions: list[Decision]
    timelines: list[TaskTimeline | None]
    gains: list[float]
    total_gain: float
    start_slots: list[int | None] = field(default_factory=list)
    table: DpTable | None = None

    @property
    def completed(self) -> int:
        return sum(tl is not None for tl in self.timelines)


def task_options(
    task: TaskSpec,
    profile: ModelProfile,
    link: LinkParams,
    gain_params: GainParams,
    slot_len: float,
    accuracy_floor: float = 0.0,
) -> list[Option]:
    """Every non-skip choice for ``task`` whose accuracy clears ``accuracy_floor``."""
    out = []
    for e, p in profile.decisions():
        acc = profile.accuracy(e)
        if acc < accuracy_floor:
            continue
        decision = Decision(e, p)
        duration = pipeline_time(profile, task, decision, link)
        out.append(Option(decision, acc, task_gain(acc, gain_params), duration, slots_needed(duration, slot_len)))
    return out


def _best_by_slots(options: Sequence[Option], max_slots: int) -> list[int]:
    """``best[d]`` = index of the preferred option fitting in ``d`` slots, or -1."""
    best = [-1] * (max_slots + 1)
    ranked = sorted(range(len(options)), key=lambda k: options[k].sort_key)
    for k in ranked:
        for d in range(options[k].slots, max_slots + 1):
            if best[d] == -1:
                best[d] = k
    return best


# -- replay -------------------------------------------------------------------


def replay(
    tasks: Sequence[TaskSpec],
    decisions: Sequence[Decision],
    profile: ModelProfile,
    link: LinkParams,
    gain_params: GainParams,
    start_slots: Sequence[int | None] | None = None,
) -> Schedule:
    """Run decisions through the continuous FCFS pipeline in arrival order.

    Tasks whose timeline misses the deadline are demoted to skip and do not
    occupy any queue.
    """
    queues = QueueState()
    out_dec, timelines, gains = [], [], []
    for task, decision in zip(tasks, decisions):
        if decision.is_skip:
            out_dec.append(SKIP)
            timelines.append(None)
            gains.append(0.0)
            continue
        tl = schedule_task(profile, task, decision, queues, link)
        if not tl.meets(task):
            out_dec.append(SKIP)
            timelines.append(None)
            gains.append(0.0)
            continue
        queues = commit(queues, task, tl)
        out_dec.append(decision)
        timelines.append(tl)
        gains.append(task_gain(tl.accuracy, gain_params))
    slots = list(start_slots) if start_slots is not None else [None] * len(tasks)
    slots = [s if not d.is_skip else None for s, d in zip(slots, out_dec)]
    total = 0.0
    for g in gains:
        total += g
    return Schedule(out_dec, timelines, gains, total, slots)


# -- dynamic program ------------------------------------------------------------


def build_dp_table(
    tasks: Sequence[TaskSpec], options: Sequence[Sequence[Option]], slot_len: float
) -> DpTable:
    n = len(tasks)
    arrivals = [arrival_slot(t, slot_len) for t in tasks]
    deadlines = [deadline_slot(t, slot_len) for t in tasks]
    horizon = max([0, *arrivals, *deadlines])

    values = np.zeros((n + 1, horizon + 1))
    take_value = np.full((n + 1, horizon + 1), -np.inf)
    take_start = np.full((n + 1, horizon + 1), -1, dtype=np.int64)
    take_option = np.full((n + 1, horizon + 1), -1, dtype=np.int64)

    for i in range(1, n + 1):
        prev = values[i - 1]
        a, dl = arrivals[i - 1], deadlines[i - 1]
        width = dl - a
        if width >= 1:
            best = _best_by_slots(options[i - 1], width)
            tv, ts, to = take_value[i], take_start[i], take_option[i]
            for d in range(1, width + 1):
                k = best[d]
                if k < 0:
                    continue
                # task starts at t in [a, dl - d] and ends at t + d
                cand = prev[a : dl - d + 1] + options[i - 1][k].gain
                seg = slice(a + d, dl + 1)
                better = cand > tv[seg]
                tv[seg] = np.where(better, cand, tv[seg])
                ts[seg] = np.where(better, np.arange(a, dl - d + 1), ts[seg])
                to[seg] = np.where(better, k, to[seg])
        # carry forward: finishing by j also means finishing by any later slot
        values[i] = np.maximum.accumulate(np.maximum(prev, take_value[i]))
    return DpTable(values, take_value, take_start, take_option)


def dp_decide(
    tasks: Sequence[TaskSpec],
    profile: ModelProfile,
    link: LinkParams,
    gain_params: GainParams,
    slot_len: float,
    accuracy_floor: float = 0.0,
) -> Schedule:
    """Gain-maximising offline schedule for the whole (known) stream."""
    if not tasks:
        return Schedule([], [], [], 0.0, [])
    options = [task_options(t, profile, link, gain_params, slot_len, accuracy_floor) for t in tasks]
    table = build_dp_table(tasks, options, slot_len)
    deadlines = [deadline_slot(t, slot_len) for t in tasks]

    decisions: list[Decision] = [SKIP] * len(tasks)
    starts: list[int | None] = [None] * len(tasks)
    j = table.values.shape[1] - 1
    for i in range(len(tasks), 0, -1):
        v = table.values[i, j]
        if v == table.values[i - 1, j]:
            continue
        last = min(j, deadlines[i - 1])
        hits = np.flatnonzero(table.take_value[i, : last + 1] == v)
        e = int(hits[0])
        k = int(table.take_option[i, e])
        decisions[i - 1] = options[i - 1][k].decision
        starts[i - 1] = int(table.take_start[i, e])
        j = starts[i - 1]

    schedule = replay(tasks, decisions, profile, link, gain_params, starts)
    schedule.table = table
    return schedule


# -- online policies -------------------------------------------------------------


def select_points(
    task: TaskSpec,
    queues: QueueState,
    profile: ModelProfile,
    link: LinkParams,
    accuracy_floor: float = 0.0,
    *,
    slot_len: float | None = None,
) -> Decision:
    """Deepest exit whose fastest partition meets the deadline, or skip.

    For each exit (deepest first) the partition with the smallest completion
    time is taken; among exits that meet the deadline and clear
    ``accuracy_floor`` the most accurate wins.

    With ``slot_len`` the queues are read on the slot grid of the serial
    system: the task starts at the first slot where it has arrived and every
    queue is free, and completion is rounded up to a whole slot.
    """
    if slot_len is not None:
        ready = max(queues.heo_ready, queues.leo(task.origin_leo))
        start = max(arrival_slot(task, slot_len), ceil_slot(ready, slot_len))
        last = deadline_slot(task, slot_len)

    best_key, best = None, SKIP
    for e in range(profile.n_exits, 0, -1):
        acc = profile.accuracy(e)
        if acc < accuracy_floor:
            continue
        fastest = None
        for p in range(profile.branch(e).layer_count + 1):
            decision = Decision(e, p)
            if slot_len is None:
                done = schedule_task(profile, task, decision, queues, link).o3
                key = (done - task.arrival, p)
                ok = done <= task.deadline
            else:
                duration = pipeline_time(profile, task, decision, link)
                end = start + slots_needed(duration, slot_len)
                key = (end * slot_len - task.arrival, duration, p)
                ok = end <= last
            if fastest is None or key < fastest[0]:
                fastest = (key, ok, p)
        key, ok, p = fastest
        if ok:
            rank = (-acc, key, e, p)
            if best_key is None or rank < best_key:
                best_key, best = rank, Decision(e, p)
    return best


def greedy_decide(
    tasks: Sequence[TaskSpec],
    profile: ModelProfile,
    link: LinkParams,
    gain_params: GainParams,
    slot_len: float,
    accuracy_floor: float = 0.0,
) -> Schedule:
    """Per-task point selection against the live slotted state."""
    busy = 0
    decisions, starts = [], []
    for task in tasks:
        start = max(arrival_slot(task, slot_len), busy)
        decision = select_points(
            task, QueueState.all_free_at(start * slot_len), profile, link, accuracy_floor, slot_len=slot_len
        )
        decisions.append(decision)
        if decision.is_skip:
            starts.append(None)
            continue
        starts.append(start)
        busy = start + slots_needed(pipeline_time(profile, task, decision, link), slot_len)
    return replay(tasks, decisions, profile, link, gain_params, starts)


def random_decide(
    tasks: Sequence[TaskSpec],
    profile: ModelProfile,
    link: LinkParams,
    gain_params: GainParams,
    slot_len: float,
    seed: int | np.random.SeedSequence | None = 0,
) -> Schedule:
    """Uniform draw over skip and every (exit, partition) pair, blind to the system state.

    A drawn task that cannot end by its deadline slot runs until that slot and
    is then dropped.
    """
    rng = np.random.default_rng(seed)
    choices = [SKIP, *(Decision(e, p) for e, p in profile.decisions())]
    busy = 0
    decisions, starts = [], []
    for task in tasks:
        decision = choices[int(rng.integers(len(choices)))]
        if decision.is_skip:
            decisions.append(SKIP)
            starts.append(None)
            continue
        start = max(arrival_slot(task, slot_len), busy)
        end = start + slots_needed(pipeline_time(profile, task, decision, link), slot_len)
        last = deadline_slot(task, slot_len)
        if end <= last:
            decisions.append(decision)
            starts.append(start)
            busy = end
        else:
            decisions.append(SKIP)
            starts.append(None)
            if start < last:
                busy = last
    return replay(tasks, decisions, profile, link, gain_params, starts)


# -- exhaustive oracle --------------------------------------------------------


def brute_force_oracle(
    tasks: Sequence[TaskSpec],
    profile: ModelProfile,
    link: LinkParams,
    gain_params: GainParams,
    slot_len: float,
    accuracy_floor: float = 0.0,
) -> Schedule:
    """Best schedule by enumerating every per-task choice vector.

    Each vector is laid out on the slot grid in arrival order with every task
    starting as early as possible; starting later never helps a fixed vector,
    so this covers every slot-aligned start assignment.
    """
    if len(tasks) > ORACLE_MAX_TASKS:
        raise InstanceTooLargeError(f"oracle handles at most {ORACLE_MAX_TASKS} tasks, got {len(tasks)}")
    if profile.option_count > ORACLE_MAX_OPTIONS:
        raise InstanceTooLargeError(
            f"oracle handles at most {ORACLE_MAX_OPTIONS} options per task, got {profile.option_count}"
        )
    options = [task_options(t, profile, link, gain_params, slot_len, accuracy_floor) for t in tasks]
    arrivals = [arrival_slot(t, slot_len) for t in tasks]
    deadlines = [deadline_slot(t, slot_len) for t in tasks]
    n = len(tasks)

    best_gain = 0.0
    best_vec: list[Option | None] = [None] * n
    vec: list[Option | None] = [None] * n

    def walk(i: int, busy: int, gain: float) -> None:
        nonlocal best_gain, best_vec
        if i == n:
            if gain > best_gain:
                best_gain, best_vec = gain, list(vec)
            return
        vec[i] = None
        walk(i + 1, busy, gain)
        start = max(arrivals[i], busy)
        for opt in options[i]:
            end = start + opt.slots
            if end > deadlines[i]:
                continue
            vec[i] = opt
            walk(i + 1, end, gain + opt.gain)
        vec[i] = None

    walk(0, 0, 0.0)

    decisions, starts, busy = [], [], 0
    for i, opt in enumerate(best_vec):
        if opt is None:
            decisions.append(SKIP)
            starts.append(None)
        else:
            start = max(arrivals[i], busy)
            decisions.append(opt.decision)
            starts.append(start)
            busy = start + opt.slots
    return replay(tasks, decisions, profile, link, gain_params, starts)


# -- registry -----------------------------------------------------------------

POLICIES = ("dp", "greedy", "random", "oracle")


def run_policy(
    name: str,
    tasks: Sequence[TaskSpec],
    profile: ModelProfile,
    link: LinkParams,
    gain_params: GainParams,
    slot_len: float,
    accuracy_floor: float = 0.0,
    seed: int | np.random.SeedSequence | None = 0,
) -> Schedule:
    runners: dict[str, Callable[[], Schedule]] = {
        "dp": lambda: dp_decide(tasks, profile, link, gain_params, slot_len, accuracy_floor),
        "greedy": lambda: greedy_decide(tasks, profile, link, gain_params, slot_len, accuracy_floor),
        "random": lambda: random_decide(tasks, profile, link, gain_params, slot_len, seed),
        "oracle": lambda: brute_force_oracle(tasks, profile, link, gain_params, slot_len, accuracy_floor),
    }
    if name not in runners:
        raise ValueError(f"unknown policy {name!r}; choose one of {', '.join(POLICIES)}")
    return runners[name]()
