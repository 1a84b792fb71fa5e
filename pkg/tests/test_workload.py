import io

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbit_sim.pipeline import TaskType
from orbit_sim.workload import WorkloadParams, generate_stream, read_stream_csv, write_stream_csv


def test_certain_arrivals():
    tasks = generate_stream(WorkloadParams(arrival_prob=1.0, n_tasks=5))
    assert [t.arrival for t in tasks] == [0.0, 3.0, 6.0, 9.0, 12.0]
    assert [t.id for t in tasks] == list(range(5))


def test_degenerate_image_count():
    params = WorkloadParams(images_mean=4, images_std=0, n_tasks=50)
    for t in generate_stream(params):
        assert t.data_size == 4 * params.bits_per_image
        assert t.deadline_rel == 4 * params.k_latency * params.bits_per_image


def test_mean_inter_arrival():
    params = WorkloadParams(arrival_prob=0.1, n_tasks=300, seed=3)
    slots = np.array([t.arrival for t in generate_stream(params)]) / params.slot_len
    gaps = np.diff(np.concatenate([[-1.0], slots]))
    # geometric(0.1) gaps: mean 10, std sqrt(0.9)/0.1 ~ 9.5; 4 standard errors
    assert abs(gaps.mean() - 10.0) < 4 * 9.5 / np.sqrt(len(gaps))


def test_image_counts_in_range_and_centred():
    params = WorkloadParams(n_tasks=2000, arrival_prob=1.0, seed=5)
    images = np.array([t.data_size / params.bits_per_image for t in generate_stream(params)])
    assert images.min() >= 1 and images.max() <= 10
    assert np.all(images == np.rint(images))
    assert abs(images.mean() - 5.5) < 0.2


def test_task_mix_and_origins():
    params = WorkloadParams(n_tasks=4000, arrival_prob=1.0, seed=2)
    tasks = generate_stream(params)
    heo = sum(t.task_type is TaskType.HEO_IMAGING for t in tasks) / len(tasks)
    assert abs(heo - 0.2) < 0.03
    assert {t.origin_leo for t in tasks} == set(range(params.leo_count))


@given(st.integers(0, 10_000), st.floats(0.05, 1.0), st.integers(0, 60))
def test_stream_invariants(seed, p, n):
    params = WorkloadParams(arrival_prob=p, n_tasks=n, seed=seed)
    tasks = generate_stream(params)
    assert len(tasks) == n
    assert all(b.arrival - a.arrival >= params.slot_len for a, b in zip(tasks, tasks[1:]))
    assert all(t.deadline_rel == params.k_latency * t.data_size for t in tasks)
    assert tasks == generate_stream(params)
    # the first tasks do not depend on how many are requested
    assert generate_stream(WorkloadParams(arrival_prob=p, n_tasks=n // 2, seed=seed)) == tasks[: n // 2]


def test_seeds_differ():
    assert generate_stream(WorkloadParams(seed=1)) != generate_stream(WorkloadParams(seed=2))


def test_csv_round_trip():
    tasks = generate_stream(WorkloadParams(n_tasks=40, seed=9))
    buf = io.StringIO()
    write_stream_csv(tasks, buf)
    assert buf.getvalue().splitlines()[0] == "id,type,origin,data_bits,deadline_s,arrival_s"
    assert read_stream_csv(buf.getvalue()) == tasks


def test_csv_rejects_bad_input():
    with pytest.raises(ValueError, match="missing"):
        read_stream_csv("id,type\n0,LEO_IMAGING\n")
    rows = "id,type,origin,data_bits,deadline_s,arrival_s\n0,LEO_IMAGING,0,1,1,5\n1,LEO_IMAGING,0,1,1,2\n"
    with pytest.raises(ValueError, match="non-decreasing"):
        read_stream_csv(rows)


@pytest.mark.parametrize(
    "kwargs, field",
    [
        ({"arrival_prob": 0}, "arrival_prob"),
        ({"arrival_prob": 1.5}, "arrival_prob"),
        ({"images_min": 0}, "images_min"),
        ({"images_min": 5, "images_max": 4}, "images_max"),
        ({"k_latency": 0}, "k_latency"),
    ],
)
def test_params_validate(kwargs, field):
    with pytest.raises(ValueError, match=field):
        WorkloadParams(**kwargs)


def test_from_dict_rejects_unknown():
    with pytest.raises(ValueError, match="unknown"):
        WorkloadParams.from_dict({"lambda": 3})
    assert WorkloadParams.from_dict({"n_tasks": 7.0}).n_tasks == 7
