"""Scenario files: one JSON document describing a complete experiment.

Example::

    {
      "profile": "alexnet-5ee",
      "link": {"distance_m": 4e7, "tx_gain_db": 30},
      "gain": {"alpha": 0.1, "beta": 16},
      "workload": {"arrival_prob": 0.1, "n_tasks": 100},
      "policy": "dp",
      "slot_len": 3.0,
      "accuracy_floor": 0.0,
      "seed": 0,
      "output_dir": "out"
    }

``profile`` is a builtin name, a path (relative to the scenario file) or an
inline profile document. An explicit stream can be given with ``stream``
(CSV path) or ``tasks`` (list of rows using the stream CSV column names);
otherwise the workload section generates one from ``seed``.
"""

from __future__ import annotations

import copy
import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Mapping

from .gain import GainParams
from .link import LinkParams
from .pipeline import TaskSpec, TaskType
from .profile import BUILTIN_PROFILES, ModelProfile, ProfileError, builtin_profile, load_profile, load_profile_file
from .schedulers import POLICIES
from .workload import WorkloadParams, generate_stream, read_stream_csv

__all__ = ["ConfigError", "Scenario", "load_scenario", "scenario_from_dict", "apply_overrides"]

TOP_LEVEL = {
    "profile", "link", "gain", "workload", "policy", "slot_len",
    "accuracy_floor", "seed", "output_dir", "stream", "tasks",
}


class ConfigError(ValueError):
    """Scenario validation failure; the message names the offending field."""


@dataclass(frozen=True)
class Scenario:
    profile: ModelProfile
    link: LinkParams
    gain: GainParams
    workload: WorkloadParams
    policy: str = "dp"
    slot_len: float = 3.0
    accuracy_floor: float = 0.0
    seed: int = 0
    output_dir: str = "out"
    tasks: tuple[TaskSpec, ...] | None = None
    profile_ref: Any = "alexnet-5ee"

    def __post_init__(self):
        if self.policy not in POLICIES:
            raise ConfigError(f"policy: unknown {self.policy!r}; choose one of {', '.join(POLICIES)}")
        if not self.slot_len > 0:
            raise ConfigError("slot_len: must be > 0")
        if self.workload.slot_len != self.slot_len:
            raise ConfigError(
                f"workload.slot_len: {self.workload.slot_len} differs from slot_len {self.slot_len}"
            )
        if self.gain.a_min != self.profile.a_min:
            raise ConfigError(
                f"gain.a_min: {self.gain.a_min} does not match the profile's first exit accuracy {self.profile.a_min}"
            )
        if not 0.0 <= self.accuracy_floor < 1.0:
            raise ConfigError("accuracy_floor: must lie in [0, 1)")

    @classmethod
    def default(cls, **changes) -> "Scenario":
        profile = builtin_profile()
        base = cls(profile, LinkParams(), GainParams.for_profile(profile), WorkloadParams())
        return base.with_changes(**changes) if changes else base

    def with_changes(self, **changes) -> "Scenario":
        """Copy with top-level fields or workload fields (``n_tasks=...``) replaced."""
        wl_fields = set(WorkloadParams.__dataclass_fields__) - {"slot_len", "seed"}
        wl = {k: changes.pop(k) for k in list(changes) if k in wl_fields}
        workload = replace(self.workload, **wl) if wl else self.workload
        if "slot_len" in changes:
            workload = replace(workload, slot_len=changes["slot_len"])
        if "seed" in changes:
            workload = replace(workload, seed=changes["seed"])
        return replace(self, workload=workload, **changes)

    def stream(self) -> list[TaskSpec]:
        if self.tasks is not None:
            return list(self.tasks)
        return generate_stream(self.workload)

    def to_dict(self) -> dict:
        wl = self.workload.to_dict()
        wl.pop("slot_len")
        wl.pop("seed")
        doc = {
            "profile": self.profile_ref,
            "link": self.link.to_dict(),
            "gain": {"alpha": self.gain.alpha, "beta": self.gain.beta},
            "workload": wl,
            "policy": self.policy,
            "slot_len": self.slot_len,
            "accuracy_floor": self.accuracy_floor,
            "seed": self.seed,
            "output_dir": self.output_dir,
        }
        if self.tasks is not None:
            doc["tasks"] = [task_to_row(t) for t in self.tasks]
        return doc


def task_to_row(t: TaskSpec) -> dict:
    return {
        "id": t.id,
        "type": t.task_type.value,
        "origin": t.origin_leo,
        "data_bits": t.data_size,
        "deadline_s": t.deadline_rel,
        "arrival_s": t.arrival,
    }


def _task_from_row(row: Mapping[str, Any], i: int) -> TaskSpec:
    try:
        return TaskSpec(
            id=int(row["id"]),
            task_type=TaskType(row["type"]),
            data_size=float(row["data_bits"]),
            deadline_rel=float(row["deadline_s"]),
            arrival=float(row["arrival_s"]),
            origin_leo=int(row.get("origin", 0)),
        )
    except KeyError as exc:
        raise ConfigError(f"tasks[{i}].{exc.args[0]}: missing") from None
    except ValueError as exc:
        raise ConfigError(f"tasks[{i}]: {exc}") from None


def _resolve_profile(ref: Any, base: Path) -> tuple[ModelProfile, Any]:
    try:
        if isinstance(ref, Mapping):
            return load_profile(ref), copy.deepcopy(dict(ref))
        if isinstance(ref, str):
            if ref in BUILTIN_PROFILES:
                return builtin_profile(ref), ref
            path = (base / ref).resolve()
            return load_profile_file(path), str(path)
    except ProfileError as exc:
        raise ConfigError(f"profile: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"profile: not valid JSON ({exc})") from None
    raise ConfigError("profile: must be a builtin name, a path or an inline document")


def _section(doc: Mapping[str, Any], key: str) -> dict:
    value = doc.get(key, {})
    if not isinstance(value, Mapping):
        raise ConfigError(f"{key}: must be an object")
    return dict(value)


def scenario_from_dict(doc: Mapping[str, Any], base_dir: str | Path = ".") -> Scenario:
    """Validate a parsed scenario document. File references resolve against ``base_dir``."""
    if not isinstance(doc, Mapping):
        raise ConfigError("scenario must be a JSON object")
    unknown = sorted(set(doc) - TOP_LEVEL)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown top-level field")
    base = Path(base_dir)
    profile, profile_ref = _resolve_profile(doc.get("profile", "alexnet-5ee"), base)

    try:
        link = LinkParams.from_dict(_section(doc, "link"))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc) if str(exc).startswith("link") else f"link: {exc}") from None

    gain_doc = _section(doc, "gain")
    extra = sorted(set(gain_doc) - {"alpha", "beta", "a_min"})
    if extra:
        raise ConfigError(f"gain.{extra[0]}: unknown field")
    try:
        gain = GainParams(
            float(gain_doc.get("alpha", 0.1)),
            float(gain_doc.get("beta", 16.0)),
            float(gain_doc.get("a_min", profile.a_min)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None

    try:
        slot_len = float(doc.get("slot_len", 3.0))
        seed = int(doc.get("seed", 0))
        floor = float(doc.get("accuracy_floor", 0.0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"slot_len/seed/accuracy_floor: {exc}") from None

    wl_doc = _section(doc, "workload")
    if "seed" in wl_doc:
        raise ConfigError("workload.seed: use the top-level seed field")
    if "slot_len" in wl_doc and float(wl_doc["slot_len"]) != slot_len:
        raise ConfigError(f"workload.slot_len: {wl_doc['slot_len']} differs from slot_len {slot_len}")
    wl_doc.update(slot_len=slot_len, seed=seed)
    try:
        workload = WorkloadParams.from_dict(wl_doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None

    tasks = None
    if "stream" in doc and "tasks" in doc:
        raise ConfigError("stream: give either stream or tasks, not both")
    if "stream" in doc:
        with open(base / doc["stream"]) as fh:
            try:
                tasks = tuple(read_stream_csv(fh))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"stream: {exc}") from None
    elif "tasks" in doc:
        rows = doc["tasks"]
        if not isinstance(rows, list):
            raise ConfigError("tasks: must be a list")
        tasks = tuple(_task_from_row(r, i) for i, r in enumerate(rows))
        if any(b.arrival < a.arrival for a, b in zip(tasks, tasks[1:])):
            raise ConfigError("tasks: arrivals must be non-decreasing")

    return Scenario(
        profile=profile,
        link=link,
        gain=gain,
        workload=workload,
        policy=str(doc.get("policy", "dp")),
        slot_len=slot_len,
        accuracy_floor=floor,
        seed=seed,
        output_dir=str(doc.get("output_dir", "out")),
        tasks=tasks,
        profile_ref=profile_ref,
    )


def apply_overrides(doc: Mapping[str, Any], assignments: list[str]) -> dict:
    """Apply ``section.key=value`` overrides; values parse as JSON when possible."""
    out = copy.deepcopy(dict(doc))
    for item in assignments:
        if "=" not in item:
            raise ConfigError(f"override {item!r}: expected key=value")
        key, raw = item.split("=", 1)
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        *parents, leaf = key.split(".")
        node = out
        for p in parents:
            node = node.setdefault(p, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override {key}: {p} is not a section")
        node[leaf] = value
    return out


def load_scenario(path: str | os.PathLike, overrides: list[str] | None = None) -> Scenario:
    """Read, override and validate a scenario file. I/O errors propagate as ``OSError``."""
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from None
    return scenario_from_dict(apply_overrides(doc, overrides or []), Path(path).parent)
