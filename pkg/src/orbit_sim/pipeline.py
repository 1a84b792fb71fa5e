"""Three-stage LEO/HEO execution pipeline and its FCFS timeline recurrences.

A task runs in up to three stages:

* stage 1 on the origin LEO satellite,
* stage 2 on the HEO satellite,
* stage 3 back on the origin LEO.

LEO-imaging tasks use stages 1 and 2 (front part local, rest on the HEO);
HEO-imaging tasks use stages 2 and 3 (front part on the HEO, rest on the LEO).
A stage with no layers to run does not queue on its satellite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from types import MappingProxyType
from typing import Mapping, NamedTuple

from .link import LinkParams, transfer_time
from .profile import Device, ModelProfile, predict_layer_time, predict_output_size

__all__ = [
    "TaskType",
    "TaskSpec",
    "Decision",
    "SKIP",
    "QueueState",
    "StageTimes",
    "TaskTimeline",
    "stage_times",
    "schedule_task",
    "commit",
    "pipeline_time",
    "ceil_slot",
    "slots_needed",
    "arrival_slot",
    "deadline_slot",
]


class TaskType(str, Enum):
    LEO_IMAGING = "LEO_IMAGING"
    HEO_IMAGING = "HEO_IMAGING"


@dataclass(frozen=True)
class TaskSpec:
    id: int
    task_type: TaskType
    data_size: float  # bits
    deadline_rel: float  # seconds after arrival
    arrival: float  # seconds
    origin_leo: int = 0

    def __post_init__(self):
        if self.arrival < 0:
            raise ValueError(f"task {self.id}: arrival must be >= 0")
        if self.data_size < 0 or self.deadline_rel < 0:
            raise ValueError(f"task {self.id}: data_size and deadline_rel must be >= 0")

    @property
    def deadline(self) -> float:
        return self.arrival + self.deadline_rel


@dataclass(frozen=True, order=True)
class Decision:
    """Exit point ``E`` (1..M) and partition point ``P`` (0..M_E); ``E == 0`` is skip."""

    exit_point: int = 0
    partition_point: int = 0

    @property
    def is_skip(self) -> bool:
        return self.exit_point == 0

    def validate(self, profile: ModelProfile) -> None:
        if self.is_skip:
            return
        branch = profile.branch(self.exit_point)
        if not 0 <= self.partition_point <= branch.layer_count:
            raise IndexError(
                f"partition point {self.partition_point} outside 0..{branch.layer_count}"
            )


SKIP = Decision(0, 0)


@dataclass(frozen=True)
class QueueState:
    """Ready times of the LEO queues (keyed by satellite id) and of the HEO queue.

    LEOs missing from ``leo_ready`` are free from ``leo_default`` on.
    """

    leo_ready: Mapping[int, float] = field(default_factory=dict)
    heo_ready: float = 0.0
    leo_default: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "leo_ready", MappingProxyType(dict(self.leo_ready)))

    def leo(self, origin: int) -> float:
        return self.leo_ready.get(origin, self.leo_default)

    @classmethod
    def all_free_at(cls, t: float) -> "QueueState":
        """Every satellite becomes free at ``t`` (the serial slotted system)."""
        return cls({}, t, t)


class StageTimes(NamedTuple):
    p1: float
    p2: float
    p3: float
    tr1: float
    tr2: float

    @property
    def total(self) -> float:
        return self.p1 + self.tr1 + self.p2 + self.tr2 + self.p3


@dataclass(frozen=True)
class TaskTimeline:
    s1: float
    o1: float
    s2: float
    o2: float
    s3: float
    o3: float
    total: float
    accuracy: float
    stages: StageTimes

    def meets(self, task: TaskSpec) -> bool:
        return self.o3 <= task.arrival + task.deadline_rel


def _layer_sum(profile, device, branch, first, last, data_size) -> float:
    return math.fsum(
        predict_layer_time(profile, device, branch, j, data_size) for j in range(first, last + 1)
    )


def stage_times(
    profile: ModelProfile, task: TaskSpec, decision: Decision, link: LinkParams
) -> StageTimes:
    """Processing and transfer durations of each stage for one decision."""
    if decision.is_skip:
        raise ValueError("stage_times called with a skip decision")
    decision.validate(profile)
    e, p, d = decision.exit_point, decision.partition_point, task.data_size
    n_layers = profile.branch(e).layer_count
    hop = 0.0
    if p < n_layers:
        hop = transfer_time(link, predict_output_size(profile, e, p, d))

    if task.task_type == TaskType.LEO_IMAGING:
        front = _layer_sum(profile, Device.LEO, e, 1, p, d)
        back = _layer_sum(profile, Device.HEO, e, p + 1, n_layers, d)
        return StageTimes(front, back, 0.0, hop, 0.0)
    front = _layer_sum(profile, Device.HEO, e, 1, p, d)
    back = _layer_sum(profile, Device.LEO, e, p + 1, n_layers, d)
    return StageTimes(0.0, front, back, 0.0, hop)


def _timeline(task: TaskSpec, st: StageTimes, queues: QueueState, accuracy: float) -> TaskTimeline:
    leo_ready = queues.leo(task.origin_leo)
    s1 = max(task.arrival, leo_ready) if st.p1 > 0 else task.arrival
    o1 = s1 + st.p1
    ready2 = o1 + st.tr1
    s2 = max(ready2, queues.heo_ready) if st.p2 > 0 else ready2
    o2 = s2 + st.p2
    ready3 = o2 + st.tr2
    s3 = max(ready3, leo_ready) if st.p3 > 0 else ready3
    o3 = s3 + st.p3
    return TaskTimeline(s1, o1, s2, o2, s3, o3, o3 - task.arrival, accuracy, st)


def schedule_task(
    profile: ModelProfile,
    task: TaskSpec,
    decision: Decision,
    queues: QueueState,
    link: LinkParams,
) -> TaskTimeline:
    """Timeline of ``task`` under ``decision`` given the current queues (not mutated)."""
    st = stage_times(profile, task, decision, link)
    return _timeline(task, st, queues, profile.accuracy(decision.exit_point))


def pipeline_time(profile: ModelProfile, task: TaskSpec, decision: Decision, link: LinkParams) -> float:
    """Queue-free completion time: arrival at 0 against idle satellites."""
    probe = replace(task, arrival=0.0)
    return schedule_task(profile, probe, decision, QueueState(), link).o3


def commit(queues: QueueState, task: TaskSpec, timeline: TaskTimeline | None) -> QueueState:
    """Queue state after ``task`` has been committed with ``timeline``.

    ``None`` (a skipped task) leaves the queues unchanged.
    """
    if timeline is None:
        return queues
    st = timeline.stages
    leo = dict(queues.leo_ready)
    heo = queues.heo_ready
    if st.p1 > 0:
        leo[task.origin_leo] = timeline.o1
    if st.p3 > 0:
        leo[task.origin_leo] = timeline.o3
    if st.p2 > 0:
        heo = timeline.o2
    return QueueState(leo, heo, queues.leo_default)


# -- slot grid ----------------------------------------------------------------
# Rounding is always conservative: durations round up, deadlines round down.


def ceil_slot(t: float, slot_len: float) -> int:
    """Smallest slot index ``n`` with ``n * slot_len >= t``."""
    n = math.ceil(t / slot_len)
    while n > 0 and (n - 1) * slot_len >= t:
        n -= 1
    while n * slot_len < t:
        n += 1
    return n


def slots_needed(duration: float, slot_len: float) -> int:
    """Whole slots covering ``duration`` seconds (at least one)."""
    return max(1, ceil_slot(duration, slot_len))


def arrival_slot(task: TaskSpec, slot_len: float) -> int:
    return ceil_slot(task.arrival, slot_len)


def deadline_slot(task: TaskSpec, slot_len: float) -> int:
    """Last slot boundary at or before the absolute deadline."""
    limit = task.arrival + task.deadline_rel
    n = math.floor(limit / slot_len)
    while (n + 1) * slot_len <= limit:
        n += 1
    while n * slot_len > limit:
        n -= 1
    return n
