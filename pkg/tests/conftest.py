import math

import pytest

from orbit_sim.link import BOLTZMANN, LIGHT_SPEED, LinkParams
from orbit_sim.pipeline import TaskSpec, TaskType
from orbit_sim.profile import load_profile


def link_with(rate: float, delay: float) -> LinkParams:
    """Link whose Shannon rate is ``rate`` (SNR argument 1) and propagation delay ``delay``.

    Unit path loss (4*pi*Q*f/c == 1) and unit gains make P_r == P_t, and P_t is
    set to the noise power so log2(1 + 1) == 1.
    """
    distance = delay * LIGHT_SPEED
    carrier = LIGHT_SPEED / (4 * math.pi * distance)
    return LinkParams(
        bandwidth_hz=rate,
        tx_power_w=BOLTZMANN * 1.0 * rate * 1.0,
        tx_gain=1.0,
        rx_gain=1.0,
        carrier_hz=carrier,
        distance_m=distance,
        noise_temp_k=1.0,
        snr_factor=1.0,
    )


def const(value):
    return {"slope": 0.0, "intercept": value}


def const_profile(branches, input_size=None):
    """Profile with constant predictors.

    ``branches`` is a list of ``(accuracy, [(leo_s, heo_s, out_bits), ...])``.
    """
    doc = {
        "input_size": input_size or {"slope": 1.0, "intercept": 0.0},
        "branches": [
            {
                "accuracy": acc,
                "layers": [
                    {"time_leo": const(leo), "time_heo": const(heo), "out_size": const(out)}
                    for leo, heo, out in layers
                ],
            }
            for acc, layers in branches
        ],
    }
    return load_profile(doc)


@pytest.fixture
def worked_profile():
    """One exit, two layers: 2 s per layer on a LEO, 1 s on the HEO, 8e6 bits after layer 1."""
    return const_profile([(0.6, [(2.0, 1.0, 8e6), (2.0, 1.0, 1e3)])])


@pytest.fixture
def worked_link():
    """8e6 bit/s with 0.1 s propagation."""
    return link_with(8e6, 0.1)


def make_task(i=0, kind=TaskType.LEO_IMAGING, data=1e6, deadline=100.0, arrival=0.0, origin=0):
    return TaskSpec(i, kind, data, deadline, arrival, origin)
