"""Latency-constrained multi-exit DNN inference offloading between LEO and HEO satellites."""

from .gain import GainParams, best_accuracy_within, task_gain
from .link import LinkParams, link_rate, received_power, transfer_time
from .pipeline import SKIP, Decision, QueueState, TaskSpec, TaskTimeline, TaskType, commit, schedule_task, stage_times
from .profile import (
    Device,
    LinearPredictor,
    ModelProfile,
    builtin_profile,
    fit_linear_predictor,
    load_profile,
    predict_layer_time,
    predict_output_size,
)
from .scenario import ConfigError, Scenario, load_scenario
from .schedulers import (
    Schedule,
    brute_force_oracle,
    dp_decide,
    greedy_decide,
    random_decide,
    run_policy,
    select_points,
)
from .sim import Metrics, SweepResult, margin_pct, run, sweep
from .workload import WorkloadParams, generate_stream

__version__ = "0.1.0"
