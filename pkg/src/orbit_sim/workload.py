"""Seeded synthetic task streams with Bernoulli slot arrivals."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, fields
from typing import Any, Iterable, Mapping, TextIO

import numpy as np

from .pipeline import TaskSpec, TaskType

__all__ = ["WorkloadParams", "generate_stream", "write_stream_csv", "read_stream_csv", "STREAM_COLUMNS"]

STREAM_COLUMNS = ("id", "type", "origin", "data_bits", "deadline_s", "arrival_s")


@dataclass(frozen=True)
class WorkloadParams:
    """Stream generator settings.

    Defaults not pinned by the original experiment (normal mean/std, ``k_latency``,
    LEO count, task mix) are assumptions; ``k_latency`` puts the median deadline
    near ten 3-second slots.
    """

    arrival_prob: float = 0.1
    slot_len: float = 3.0
    n_tasks: int = 100
    images_mean: float = 5.5
    images_std: float = 2.0
    images_min: int = 1
    images_max: int = 10
    bits_per_image: float = 24576.0
    k_latency: float = 2.2e-4
    leo_count: int = 4
    heo_task_fraction: float = 0.2
    seed: int = 0

    def __post_init__(self):
        checks = [
            (0 < self.arrival_prob <= 1, "arrival_prob must lie in (0, 1]"),
            (self.slot_len > 0, "slot_len must be > 0"),
            (self.n_tasks >= 0, "n_tasks must be >= 0"),
            (self.images_std >= 0, "images_std must be >= 0"),
            (self.images_min >= 1, "images_min must be >= 1"),
            (self.images_max >= self.images_min, "images_max must be >= images_min"),
            (self.bits_per_image > 0, "bits_per_image must be > 0"),
            (self.k_latency > 0, "k_latency must be > 0"),
            (self.leo_count >= 1, "leo_count must be >= 1"),
            (0 <= self.heo_task_fraction <= 1, "heo_task_fraction must lie in [0, 1]"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ValueError(f"workload.{msg}")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "WorkloadParams":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(doc) - set(known))
        if unknown:
            raise ValueError(f"workload: unknown field(s) {unknown}")
        kw = {}
        for key, value in doc.items():
            kind = int if known[key].default.__class__ is int else float
            kw[key] = kind(value)
        return cls(**kw)

    def to_dict(self) -> dict:
        return asdict(self)


def generate_stream(params: WorkloadParams) -> list[TaskSpec]:
    """Walk slots 0, 1, 2, ... spawning a task in each with probability ``arrival_prob``.

    Draws happen in a fixed per-slot order, so the first ``n`` tasks of a
    stream do not depend on ``n_tasks``.
    """
    rng = np.random.default_rng(params.seed)
    tasks: list[TaskSpec] = []
    slot = 0
    while len(tasks) < params.n_tasks:
        if rng.random() < params.arrival_prob:
            images = int(np.rint(rng.normal(params.images_mean, params.images_std)))
            images = min(max(images, params.images_min), params.images_max)
            origin = int(rng.integers(params.leo_count))
            heo = rng.random() < params.heo_task_fraction
            data = images * params.bits_per_image
            tasks.append(
                TaskSpec(
                    id=len(tasks),
                    task_type=TaskType.HEO_IMAGING if heo else TaskType.LEO_IMAGING,
                    data_size=data,
                    deadline_rel=params.k_latency * data,
                    arrival=slot * params.slot_len,
                    origin_leo=origin,
                )
            )
        slot += 1
    return tasks


def write_stream_csv(tasks: Iterable[TaskSpec], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(STREAM_COLUMNS)
    for t in tasks:
        writer.writerow([t.id, t.task_type.value, t.origin_leo, repr(t.data_size), repr(t.deadline_rel), repr(t.arrival)])


def read_stream_csv(fh: TextIO | str) -> list[TaskSpec]:
    if isinstance(fh, str):
        fh = io.StringIO(fh)
    reader = csv.DictReader(fh)
    missing = [c for c in STREAM_COLUMNS if c not in (reader.fieldnames or [])]
    if missing:
        raise ValueError(f"stream CSV missing column(s) {missing}")
    tasks = [
        TaskSpec(
            id=int(row["id"]),
            task_type=TaskType(row["type"]),
            data_size=float(row["data_bits"]),
            deadline_rel=float(row["deadline_s"]),
            arrival=float(row["arrival_s"]),
            origin_leo=int(row["origin"]),
        )
        for row in reader
    ]
    if any(b.arrival < a.arrival for a, b in zip(tasks, tasks[1:])):
        raise ValueError("stream CSV arrivals must be non-decreasing")
    return tasks
