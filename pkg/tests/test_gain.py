import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from orbit_sim.gain import GainParams, best_accuracy_within, task_gain
from orbit_sim.link import LinkParams
from orbit_sim.pipeline import SKIP, Decision, QueueState, TaskSpec, TaskType, schedule_task
from orbit_sim.profile import builtin_profile

from conftest import const_profile

PARAMS = GainParams()
# 1 + 0.1 / (1 + exp(-16 * 0.216)), 40-digit mpmath evaluation
GOLDEN_GAIN_0743 = 1.0969409570578176093


def test_gain_at_a_min_is_midpoint():
    assert task_gain(0.527, PARAMS) == 1.05
    for a_min in (0.1, 0.3, 0.9):
        assert task_gain(a_min, GainParams(0.2, 7.0, a_min)) == 1.1


def test_gain_skip_is_zero():
    assert task_gain(0.0, PARAMS) == 0.0


def test_gain_golden():
    assert task_gain(0.743, PARAMS) == pytest.approx(GOLDEN_GAIN_0743, rel=1e-14)


@pytest.mark.parametrize("acc", [-0.1, 1.0, 1.5, math.nan])
def test_gain_domain(acc):
    with pytest.raises(ValueError):
        task_gain(acc, PARAMS)


@pytest.mark.parametrize("kwargs", [{"alpha": 0}, {"beta": -1}, {"a_min": 1.0}])
def test_gain_params_validate(kwargs):
    with pytest.raises(ValueError):
        GainParams(**kwargs)


@given(st.floats(1e-6, 1 - 1e-6))
def test_gain_bounds(a):
    g = task_gain(a, PARAMS)
    assert 1.0 <= g <= 1.0 + PARAMS.alpha
    if 0.01 < a < 0.99:
        assert 1.0 < g < 1.0 + PARAMS.alpha


@given(st.floats(1e-6, 0.999), st.floats(1e-4, 0.5))
def test_gain_increasing(a, step):
    b = min(a + step, 0.999999)
    assert task_gain(b, PARAMS) >= task_gain(a, PARAMS)
    if b - a > 1e-3:
        assert task_gain(b, PARAMS) > task_gain(a, PARAMS)


# -- best accuracy within budget ------------------------------------------------


def enumerate_feasible(profile, link, data, budget, kind=TaskType.LEO_IMAGING):
    probe = TaskSpec(0, kind, data, budget, 0.0)
    out = {}
    for e, p in profile.decisions():
        done = schedule_task(profile, probe, Decision(e, p), QueueState(), link).o3
        if done <= budget:
            out[(e, p)] = done
    return out


def test_zero_budget(worked_profile, worked_link):
    assert best_accuracy_within(worked_profile, worked_link, 1e6, 0.0) == (0.0, SKIP)


def test_infinite_budget_alexnet():
    prof = builtin_profile()
    acc, decision = best_accuracy_within(prof, LinkParams(), 24576 * 5, math.inf)
    assert acc == 0.743
    assert decision.exit_point == 4


def test_worked_budget(worked_profile, worked_link):
    # P=1 finishes at 4.1 s and misses 4.05 s; P=0 ships the raw 1e6-bit input
    # (0.225 s) and runs both layers on the HEO (2 s); P=2 runs locally in 4 s.
    feasible = enumerate_feasible(worked_profile, worked_link, 1e6, 4.05)
    assert set(feasible) == {(1, 0), (1, 2)}
    assert feasible[(1, 0)] == pytest.approx(2.225)
    assert best_accuracy_within(worked_profile, worked_link, 1e6, 4.05) == (0.6, Decision(1, 0))


def test_tie_breaks_on_completion_then_indices(worked_link):
    prof = const_profile([(0.5, [(1.0, 1.0, 0.0)]), (0.7, [(3.0, 3.0, 0.0)])])
    # exit 2: P=0 = 0.225 + 3, P=1 = 3 (local, no hop)
    assert best_accuracy_within(prof, worked_link, 1e6, 10.0) == (0.7, Decision(2, 1))
    assert best_accuracy_within(prof, worked_link, 1e6, 2.0) == (0.5, Decision(1, 1))


def test_heo_task_type(worked_profile, worked_link):
    acc, decision = best_accuracy_within(worked_profile, worked_link, 1e6, 2.5, TaskType.HEO_IMAGING)
    assert (acc, decision) == (0.6, Decision(1, 2))


budgets = st.floats(0.0, 20.0)


@given(budgets, budgets, st.floats(0.0, 4e7))
def test_monotone_in_budget(b1, b2, data):
    prof = const_profile([(0.5, [(1.0, 0.5, 1e6)]), (0.7, [(2.0, 1.0, 4e6), (2.0, 1.0, 1e3)])])
    link = LinkParams(distance_m=3e6)
    lo, hi = sorted((b1, b2))
    assert best_accuracy_within(prof, link, data, lo)[0] <= best_accuracy_within(prof, link, data, hi)[0]


@given(budgets, st.floats(0.0, 4e7), st.sampled_from(list(TaskType)))
def test_result_is_feasible_and_maximal(budget, data, kind):
    prof = const_profile([(0.5, [(1.0, 0.5, 1e6)]), (0.7, [(2.0, 1.0, 4e6), (2.0, 1.0, 1e3)])])
    link = LinkParams(distance_m=3e6)
    acc, decision = best_accuracy_within(prof, link, data, budget, kind)
    feasible = enumerate_feasible(prof, link, data, budget, kind)
    if not feasible:
        assert (acc, decision) == (0.0, SKIP)
        return
    assert (decision.exit_point, decision.partition_point) in feasible
    assert acc == max(prof.accuracy(e) for e, _ in feasible)
