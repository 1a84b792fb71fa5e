"""Randomised DP-versus-oracle equivalence harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pipeline import TaskType
from .scenario import Scenario, scenario_from_dict
from .schedulers import ORACLE_MAX_OPTIONS, ORACLE_MAX_TASKS, brute_force_oracle, dp_decide

__all__ = ["random_instance", "oracle_check", "OracleCheckResult"]


def _random_profile_doc(rng: np.random.Generator, max_exits: int, max_layers: int) -> dict:
    while True:
        m = int(rng.integers(1, max_exits + 1))
        counts = [int(rng.integers(1, max_layers + 1)) for _ in range(m)]
        if 1 + sum(c + 1 for c in counts) <= ORACLE_MAX_OPTIONS:
            break
    accs = np.sort(rng.choice(np.arange(30, 96), size=m, replace=False)) / 100.0

    def pred(hi):
        return {"slope": 0.0, "intercept": float(np.round(rng.uniform(0.0, hi), 3))}

    branches = []
    for acc, count in zip(accs, counts):
        layers = [
            {"time_leo": pred(6.0), "time_heo": pred(3.0), "out_size": pred(4e5)}
            for _ in range(count)
        ]
        branches.append({"accuracy": float(acc), "layers": layers})
    return {"input_size": {"slope": 1.0, "intercept": 0.0}, "branches": branches}


def random_instance(
    rng: np.random.Generator,
    base: Scenario,
    max_n: int = 4,
    max_exits: int = 3,
    max_layers: int = 3,
    horizon: int = 60,
) -> dict:
    """A small random scenario document with an inline profile and an explicit stream.

    The returned dict is a complete scenario: write it to disk and ``run`` it.
    """
    slot = base.slot_len
    n = int(rng.integers(1, max_n + 1))
    # arrivals packed into the first sixth of the horizon so tasks contend
    arrivals = np.sort(rng.integers(0, max(1, horizon // 6), size=n))
    tasks = []
    for i, a in enumerate(arrivals):
        room = horizon - int(a)
        deadline_slots = float(rng.uniform(1.0, min(8.0, room)))
        tasks.append(
            {
                "id": i,
                "type": (TaskType.HEO_IMAGING if rng.random() < 0.3 else TaskType.LEO_IMAGING).value,
                "origin": int(rng.integers(2)),
                "data_bits": float(rng.integers(1, 11) * 24576),
                "deadline_s": deadline_slots * slot,
                "arrival_s": float(a) * slot,
            }
        )
    doc = base.to_dict()
    doc.pop("workload", None)
    doc.update(profile=_random_profile_doc(rng, max_exits, max_layers), tasks=tasks)
    return doc


@dataclass
class OracleCheckResult:
    checked: int
    mismatches: int
    first_counterexample: dict | None
    dp_gain: float | None = None
    oracle_gain: float | None = None


def oracle_check(base: Scenario, instances: int, max_n: int = 4, seed: int = 0, tol: float = 1e-9) -> OracleCheckResult:
    if not 1 <= max_n <= ORACLE_MAX_TASKS:
        raise ValueError(f"max_n: must lie in 1..{ORACLE_MAX_TASKS}, got {max_n}")
    rng = np.random.default_rng(seed)
    result = OracleCheckResult(0, 0, None)
    for _ in range(instances):
        doc = random_instance(rng, base, max_n=max_n)
        sc = scenario_from_dict(doc)
        tasks = list(sc.tasks)
        args = (tasks, sc.profile, sc.link, sc.gain, sc.slot_len, sc.accuracy_floor)
        dp = dp_decide(*args).total_gain
        oracle = brute_force_oracle(*args).total_gain
        result.checked += 1
        if abs(dp - oracle) > tol:
            result.mismatches += 1
            if result.first_counterexample is None:
                result.first_counterexample = doc
                result.dp_gain, result.oracle_gain = dp, oracle
    return result
