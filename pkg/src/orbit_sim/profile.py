"""Multi-exit DNN profiles and the linear predictors behind them.

A profile describes a network with several early-exit branches. Each branch is
an ordered list of layers, and every layer carries three linear predictors of
the task's input data size ``D`` (bits):

* inference time on a LEO satellite (seconds),
* inference time on the HEO satellite (seconds),
* size of the layer's output tensor (bits).

Exit index 0 is reserved for "skip" (accuracy 0) and is never stored.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from enum import IntEnum
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Device",
    "LinearPredictor",
    "LayerProfile",
    "BranchProfile",
    "ModelProfile",
    "ProfileError",
    "DegenerateFitError",
    "ClampedFitWarning",
    "predict_layer_time",
    "predict_output_size",
    "fit_linear_predictor",
    "load_profile",
    "load_profile_file",
    "builtin_profile",
    "profile_to_document",
    "save_profile",
]


class Device(IntEnum):
    LEO = 0
    HEO = 1


class ProfileError(ValueError):
    """Raised when a profile document fails validation."""


class DegenerateFitError(ValueError):
    """Raised when a least-squares fit is under-determined."""


class ClampedFitWarning(UserWarning):
    """A fitted coefficient came out negative and was clamped to zero."""


@dataclass(frozen=True)
class LinearPredictor:
    slope: float
    intercept: float

    def __post_init__(self):
        for name in ("slope", "intercept"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ProfileError(f"{name} must be finite and >= 0, got {value!r}")

    def __call__(self, x: float) -> float:
        return self.slope * x + self.intercept

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept}


IDENTITY = LinearPredictor(1.0, 0.0)


@dataclass(frozen=True)
class LayerProfile:
    time_leo: LinearPredictor
    time_heo: LinearPredictor
    out_size: LinearPredictor

    def time(self, device: Device) -> LinearPredictor:
        return self.time_heo if device == Device.HEO else self.time_leo


@dataclass(frozen=True)
class BranchProfile:
    layers: tuple[LayerProfile, ...]
    accuracy: float

    def __post_init__(self):
        if not self.layers:
            raise ProfileError("branch must contain at least one layer")
        if not 0.0 < self.accuracy < 1.0:
            raise ProfileError(f"branch accuracy must lie in (0, 1), got {self.accuracy!r}")

    @property
    def layer_count(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class ModelProfile:
    """An immutable multi-exit network description.

    ``branches[0]`` is exit point 1; exit point 0 (skip) is implicit.
    """

    branches: tuple[BranchProfile, ...]
    input_size_fn: LinearPredictor = IDENTITY
    name: str = ""

    def __post_init__(self):
        if not self.branches:
            raise ProfileError("branches: profile needs at least one branch")
        accs = [b.accuracy for b in self.branches]
        for k in range(1, len(accs)):
            if not accs[k] > accs[k - 1]:
                raise ProfileError(
                    f"branches[{k}].accuracy: accuracies must strictly increase, got {accs}"
                )

    @property
    def n_exits(self) -> int:
        return len(self.branches)

    @property
    def a_min(self) -> float:
        return self.branches[0].accuracy

    @property
    def accuracies(self) -> list[float]:
        return [b.accuracy for b in self.branches]

    def branch(self, exit_point: int) -> BranchProfile:
        if not 1 <= exit_point <= len(self.branches):
            raise IndexError(f"exit point {exit_point} outside 1..{len(self.branches)}")
        return self.branches[exit_point - 1]

    def accuracy(self, exit_point: int) -> float:
        if exit_point == 0:
            return 0.0
        return self.branch(exit_point).accuracy

    def decisions(self) -> Iterable[tuple[int, int]]:
        """Yield every non-skip (exit, partition) pair in (E asc, P asc) order."""
        for e, branch in enumerate(self.branches, start=1):
            for p in range(branch.layer_count + 1):
                yield e, p

    @property
    def option_count(self) -> int:
        """Number of per-task choices including skip."""
        return 1 + sum(b.layer_count + 1 for b in self.branches)


def _layer(profile: ModelProfile, branch: int, layer: int) -> LayerProfile:
    b = profile.branch(branch)
    if not 1 <= layer <= b.layer_count:
        raise IndexError(f"layer {layer} outside 1..{b.layer_count} for branch {branch}")
    return b.layers[layer - 1]


def predict_layer_time(
    profile: ModelProfile, device: Device, branch: int, layer: int, data_size: float
) -> float:
    """Predicted seconds for one layer of one branch on ``device``."""
    return _layer(profile, branch, layer).time(Device(device))(data_size)


def predict_output_size(profile: ModelProfile, branch: int, layer: int, data_size: float) -> float:
    """Predicted bits leaving ``layer``; layer 0 means the raw model input."""
    if layer == 0:
        profile.branch(branch)
        return profile.input_size_fn(data_size)
    return _layer(profile, branch, layer).out_size(data_size)


def fit_linear_predictor(samples: Sequence[tuple[float, float]]) -> LinearPredictor:
    """Ordinary least-squares line through ``(data_size, measurement)`` samples.

    Negative coefficients are clamped to zero and reported through a
    :class:`ClampedFitWarning`.
    """
    if len(samples) < 2:
        raise DegenerateFitError(f"need at least 2 samples, got {len(samples)}")
    arr = np.asarray(samples, dtype=float)
    x, y = arr[:, 0], arr[:, 1]
    if np.ptp(x) == 0:
        raise DegenerateFitError("all samples share the same data size")
    design = np.column_stack([x, np.ones_like(x)])
    (slope, intercept), *_ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = float(slope), float(intercept)

    # rounding noise around zero is not worth a warning
    noise = 1e-12 * (float(np.max(np.abs(y))) + 1.0)
    clamped = []
    if slope < 0:
        if slope < -noise / max(float(np.max(np.abs(x))), 1.0):
            clamped.append(f"slope={slope:.6g}")
        slope = 0.0
    if intercept < 0:
        if intercept < -noise:
            clamped.append(f"intercept={intercept:.6g}")
        intercept = 0.0
    if clamped:
        warnings.warn(
            "negative least-squares fit clamped to 0: " + ", ".join(clamped),
            ClampedFitWarning,
            stacklevel=2,
        )
    return LinearPredictor(slope, intercept)


# -- documents ---------------------------------------------------------------


def _predictor(doc: Any, where: str) -> LinearPredictor:
    if not isinstance(doc, Mapping):
        raise ProfileError(f"{where}: expected an object with slope/intercept")
    try:
        slope = float(doc["slope"])
        intercept = float(doc["intercept"])
    except KeyError as exc:
        raise ProfileError(f"{where}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise ProfileError(f"{where}: slope/intercept must be numbers") from None
    try:
        return LinearPredictor(slope, intercept)
    except ProfileError as exc:
        raise ProfileError(f"{where}: {exc}") from None


def load_profile(document: Mapping[str, Any]) -> ModelProfile:
    """Build a validated :class:`ModelProfile` from a parsed JSON document."""
    if not isinstance(document, Mapping):
        raise ProfileError("profile document must be a JSON object")
    raw_branches = document.get("branches")
    if not isinstance(raw_branches, list) or not raw_branches:
        raise ProfileError("branches: must be a non-empty list")

    branches = []
    for bi, raw in enumerate(raw_branches):
        where = f"branches[{bi}]"
        if not isinstance(raw, Mapping):
            raise ProfileError(f"{where}: expected an object")
        if "accuracy" not in raw:
            raise ProfileError(f"{where}.accuracy: missing")
        try:
            accuracy = float(raw["accuracy"])
        except (TypeError, ValueError):
            raise ProfileError(f"{where}.accuracy: must be a number") from None
        raw_layers = raw.get("layers")
        if not isinstance(raw_layers, list) or not raw_layers:
            raise ProfileError(f"{where}.layers: must be a non-empty list")
        layers = []
        for li, layer in enumerate(raw_layers):
            lw = f"{where}.layers[{li}]"
            if not isinstance(layer, Mapping):
                raise ProfileError(f"{lw}: expected an object")
            layers.append(
                LayerProfile(
                    time_leo=_predictor(layer.get("time_leo"), f"{lw}.time_leo"),
                    time_heo=_predictor(layer.get("time_heo"), f"{lw}.time_heo"),
                    out_size=_predictor(layer.get("out_size"), f"{lw}.out_size"),
                )
            )
        try:
            branches.append(BranchProfile(tuple(layers), accuracy))
        except ProfileError as exc:
            raise ProfileError(f"{where}.accuracy: {exc}") from None

    input_size = document.get("input_size")
    input_fn = IDENTITY if input_size is None else _predictor(input_size, "input_size")
    return ModelProfile(tuple(branches), input_fn, str(document.get("name", "")))


def profile_to_document(profile: ModelProfile) -> dict:
    doc: dict[str, Any] = {}
    if profile.name:
        doc["name"] = profile.name
    doc["input_size"] = profile.input_size_fn.to_dict()
    doc["branches"] = [
        {
            "accuracy": b.accuracy,
            "layers": [
                {
                    "time_leo": layer.time_leo.to_dict(),
                    "time_heo": layer.time_heo.to_dict(),
                    "out_size": layer.out_size.to_dict(),
                }
                for layer in b.layers
            ],
        }
        for b in profile.branches
    ]
    return doc


def save_profile(profile: ModelProfile, path: str | Path) -> None:
    Path(path).write_text(json.dumps(profile_to_document(profile), indent=2) + "\n")


def load_profile_file(path: str | Path) -> ModelProfile:
    with open(path) as fh:
        return load_profile(json.load(fh))


BUILTIN_PROFILES = ("alexnet-5ee",)


def builtin_profile(name: str = "alexnet-5ee") -> ModelProfile:
    if name not in BUILTIN_PROFILES:
        raise KeyError(f"unknown builtin profile {name!r}; known: {BUILTIN_PROFILES}")
    text = resources.files("orbit_sim.data").joinpath(f"{name}.json").read_text()
    return load_profile(json.loads(text))
