"""Inter-satellite link model: free-space path loss plus Shannon capacity."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from typing import Any, Mapping

__all__ = [
    "BOLTZMANN",
    "LIGHT_SPEED",
    "LinkParams",
    "received_power",
    "link_rate",
    "transfer_time",
]

BOLTZMANN = 1.380649e-23  # J/K
LIGHT_SPEED = 2.998e8  # m/s


@dataclass(frozen=True)
class LinkParams:
    """Physical parameters of the LEO-HEO link.

    Gains are linear power ratios. ``from_dict`` also accepts ``tx_gain_db`` /
    ``rx_gain_db`` and converts them.
    """

    bandwidth_hz: float = 1e9
    tx_power_w: float = 10.0
    tx_gain: float = 1e3
    rx_gain: float = 1e3
    carrier_hz: float = 26e9
    distance_m: float = 4e7
    noise_temp_k: float = 354.0
    snr_factor: float = 10.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"link.{f.name} must be a positive finite number, got {value!r}")

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "LinkParams":
        doc = dict(doc)
        for key in ("tx_gain", "rx_gain"):
            db_key = f"{key}_db"
            if db_key in doc:
                if key in doc:
                    raise ValueError(f"link: give either {key} or {db_key}, not both")
                doc[key] = 10.0 ** (float(doc.pop(db_key)) / 10.0)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValueError(f"link: unknown field(s) {unknown}")
        return cls(**{k: float(v) for k, v in doc.items()})

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def received_power(params: LinkParams) -> float:
    """Received signal power in watts under free-space path loss."""
    path = 4.0 * math.pi * params.distance_m * params.carrier_hz / LIGHT_SPEED
    return params.tx_power_w * params.tx_gain * params.rx_gain / (path * path)


def link_rate(params: LinkParams) -> float:
    """Shannon rate in bits/s."""
    noise = BOLTZMANN * params.noise_temp_k * params.bandwidth_hz * params.snr_factor
    return params.bandwidth_hz * math.log2(1.0 + received_power(params) / noise)


def propagation_delay(params: LinkParams) -> float:
    return params.distance_m / LIGHT_SPEED


def transfer_time(params: LinkParams, payload: float) -> float:
    """Seconds to push ``payload`` bits across the link: serialization + propagation."""
    if payload < 0:
        raise ValueError(f"payload must be >= 0, got {payload!r}")
    return payload / link_rate(params) + params.distance_m / LIGHT_SPEED
