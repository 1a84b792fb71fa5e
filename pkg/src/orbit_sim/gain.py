"""Per-task gain and the best-accuracy-within-budget lookup."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .link import LinkParams
from .pipeline import SKIP, Decision, QueueState, TaskSpec, TaskType, schedule_task
from .profile import ModelProfile

__all__ = ["GainParams", "task_gain", "best_accuracy_within"]


@dataclass(frozen=True)
class GainParams:
    alpha: float = 0.1
    beta: float = 16.0
    a_min: float = 0.527

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"gain.alpha must be > 0, got {self.alpha!r}")
        if not self.beta > 0:
            raise ValueError(f"gain.beta must be > 0, got {self.beta!r}")
        if not 0 < self.a_min < 1:
            raise ValueError(f"gain.a_min must lie in (0, 1), got {self.a_min!r}")

    @classmethod
    def for_profile(cls, profile: ModelProfile, alpha: float = 0.1, beta: float = 16.0) -> "GainParams":
        return cls(alpha, beta, profile.a_min)


def task_gain(accuracy: float, params: GainParams) -> float:
    """Completion indicator plus a sigmoid bonus on accuracy.

    A skipped or failed task (accuracy 0) is worth exactly 0.
    """
    if not 0.0 <= accuracy < 1.0:
        raise ValueError(f"accuracy must lie in [0, 1), got {accuracy!r}")
    if accuracy == 0.0:
        return 0.0
    return 1.0 + params.alpha / (1.0 + math.exp(-params.beta * (accuracy - params.a_min)))


def best_accuracy_within(
    profile: ModelProfile,
    link: LinkParams,
    data_size: float,
    budget: float,
    task_type: TaskType = TaskType.LEO_IMAGING,
) -> tuple[float, Decision]:
    """Highest branch accuracy whose queue-free pipeline fits in ``budget`` seconds.

    Ties go to the shorter completion time, then the smaller exit, then the
    smaller partition point. Returns ``(0.0, SKIP)`` when nothing fits.
    """
    probe = TaskSpec(0, task_type, data_size, budget, 0.0)
    best_key, best = None, (0.0, SKIP)
    for e, p in profile.decisions():
        decision = Decision(e, p)
        done = schedule_task(profile, probe, decision, QueueState(), link).o3
        if done > budget:
            continue
        acc = profile.accuracy(e)
        key = (-acc, done, e, p)
        if best_key is None or key < best_key:
            best_key, best = key, (acc, decision)
    return best
