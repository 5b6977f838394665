"""Speed advisory: sweep candidate line speeds through the defect network.

The advisor scans a speed grid in ascending order with the bath state held
fixed. If even the lowest speed is predicted defective the request is
infeasible; if the trace flips to defect somewhere, the last clear point
before the first defective one is the maximum admissible speed; if the whole
grid is clear, the decision tree names the admissible speed class instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    InvalidInputError,
    RecordValidationError,
)
from .records import (
    DEFECT,
    FIELD_BOUNDS,
    CoilRecord,
    SpeedClass,
    Violation,
    class_bounds,
)

#: Bath-state inputs the network sees besides line speed, in input order.
BATH_FIELDS = ("T_3", "HCl_1", "Fe2_1", "HCl_2", "Fe2_2", "HCl_3", "Fe2_3")

GRID_V_MIN = 100.0
GRID_V_MAX = 500.0
GRID_STEP = 5.0


@dataclass(frozen=True)
class ScanGrid:
    """Ascending arithmetic grid of candidate line speeds."""

    v_min: float = GRID_V_MIN
    v_max: float = GRID_V_MAX
    step: float = GRID_STEP

    def __post_init__(self):
        if not (math.isfinite(self.v_min) and math.isfinite(self.v_max)
                and math.isfinite(self.step)):
            raise InvalidInputError("grid bounds and step must be finite")
        if self.v_min <= 0:
            raise InvalidInputError("grid speeds must be positive")
        if not self.v_min < self.v_max:
            raise InvalidInputError("grid requires v_min < v_max")
        if self.step <= 0:
            raise InvalidInputError("grid step must be positive")
        if self.v_min + self.step > self.v_max + 1e-9:
            raise InvalidInputError("grid must contain at least two points")

    def points(self) -> np.ndarray:
        n = int(math.floor((self.v_max - self.v_min) / self.step + 1e-9)) + 1
        return self.v_min + self.step * np.arange(n)


@dataclass(frozen=True)
class TracePoint:
    v: float
    prediction: str  # defect | no_defect


@dataclass(frozen=True)
class MaxSpeed:
    """Highest scanned speed still predicted clear of under-pickling."""

    v_star: float
    first_defect_speed: float
    trace: tuple[TracePoint, ...]

    kind = "max_speed"


@dataclass(frozen=True)
class SpeedRange:
    """Whole grid clear; the tree bounds the admissible speed class."""

    speed_class: SpeedClass
    bounds: tuple[float, float]
    trace: tuple[TracePoint, ...]

    kind = "speed_range"


@dataclass(frozen=True)
class Infeasible:
    """No admissible speed: defects predicted from the lowest speed up."""

    reason: str
    trace: tuple[TracePoint, ...]

    kind = "infeasible"


Advice = MaxSpeed | SpeedRange | Infeasible


def bath_inputs(source: Mapping[str, float] | CoilRecord) -> np.ndarray:
    """Extract the 7 bath-state values in network input order."""
    if isinstance(source, CoilRecord):
        return np.array([source.value(name) for name in BATH_FIELDS], dtype=float)
    try:
        return np.array([float(source[name]) for name in BATH_FIELDS], dtype=float)
    except KeyError as exc:
        raise InvalidInputError(f"missing bath input {exc.args[0]!r}") from exc


def _validate_fields(values: Mapping[str, float], names: Sequence[str]) -> None:
    violations = []
    for name in names:
        raw = values.get(name)
        if raw is None:
            violations.append(Violation(name, float("nan"), "value required"))
            continue
        value = float(raw)
        bound = FIELD_BOUNDS[name]
        if not bound.admits(value):
            violations.append(Violation(name, value, bound.describe()))
    if violations:
        raise RecordValidationError(violations)


def scan_speeds(network, bath: Mapping[str, float] | CoilRecord,
                grid: ScanGrid = ScanGrid()) -> tuple[TracePoint, ...]:
    """Predict defect/no-defect at every grid speed, ascending.

    Bath values are validated against the documented field bounds before any
    prediction runs.
    """
    if isinstance(bath, Mapping):
        _validate_fields(bath, BATH_FIELDS)
    vector = bath_inputs(bath)
    vs = grid.points()
    rows = np.empty((len(vs), len(BATH_FIELDS) + 1))
    rows[:, :-1] = vector
    rows[:, -1] = vs
    predictions = network.predict_batch(rows)
    return tuple(TracePoint(float(v), label) for v, label in zip(vs, predictions))


def advise(tree, network, inputs: Mapping[str, float],
           grid: ScanGrid = ScanGrid()) -> Advice:
    """Run the integrated advisory: network sweep first, tree as fallback.

    ``inputs`` must carry every tree feature (the bath fields are a subset).
    The scan stops at the FIRST defective grid point; any clear region above
    it is deliberately ignored as unsafe to recommend.
    """
    from .recbfn import NETWORK_FEATURES
    from .tree import TREE_FEATURES

    if tuple(network.feature_names) != NETWORK_FEATURES:
        raise ConfigurationError(
            "network features do not match the advisory inputs: "
            f"{network.feature_names}")
    if tuple(tree.feature_names) != TREE_FEATURES:
        raise ConfigurationError(
            f"tree features do not match the advisory inputs: {tree.feature_names}")
    _validate_fields(inputs, TREE_FEATURES)
    trace = scan_speeds(network, {k: float(inputs[k]) for k in BATH_FIELDS}, grid)

    if trace[0].prediction == DEFECT:
        return Infeasible(
            reason="under-pickling predicted at the lowest scanned speed",
            trace=trace)
    first_defect = next((i for i, t in enumerate(trace) if t.prediction == DEFECT),
                        None)
    if first_defect is not None:
        return MaxSpeed(v_star=trace[first_defect - 1].v,
                        first_defect_speed=trace[first_defect].v,
                        trace=trace)
    speed_class = tree.predict({k: float(inputs[k]) for k in TREE_FEATURES})
    if speed_class is SpeedClass.U:
        return Infeasible(
            reason="speed class U: defects expected at any line speed",
            trace=trace)
    return SpeedRange(speed_class=speed_class,
                      bounds=class_bounds(speed_class),
                      trace=trace)


# ---------------------------------------------------------------------------
# Text and dict renderings
# ---------------------------------------------------------------------------

def render_advice(advice: Advice) -> str:
    """Key-value header plus one trace row per grid point."""
    lines = [f"advice {advice.kind}"]
    if isinstance(advice, MaxSpeed):
        lines.append(f"v_star {advice.v_star!r}")
        lines.append(f"first_defect_speed {advice.first_defect_speed!r}")
    elif isinstance(advice, SpeedRange):
        lines.append(f"class {advice.speed_class.value}")
        lines.append(f"bounds {advice.bounds[0]!r} {advice.bounds[1]!r}")
    else:
        lines.append(f"reason {advice.reason}")
    lines.append("trace")
    for point in advice.trace:
        lines.append(f"{point.v!r} {point.prediction}")
    return "\n".join(lines) + "\n"


def parse_advice(text: str) -> Advice:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines or not lines[0].startswith("advice "):
        raise InvalidInputError("advice document must start with an 'advice' line")
    kind = lines[0].split(None, 1)[1]
    fields: dict[str, str] = {}
    trace: list[TracePoint] = []
    in_trace = False
    for ln in lines[1:]:
        if ln.strip() == "trace":
            in_trace = True
            continue
        if in_trace:
            v_s, label = ln.split()
            trace.append(TracePoint(float(v_s), label))
        else:
            key, _, value = ln.partition(" ")
            fields[key] = value
    points = tuple(trace)
    if kind == "max_speed":
        return MaxSpeed(float(fields["v_star"]),
                        float(fields["first_defect_speed"]), points)
    if kind == "speed_range":
        lo, hi = fields["bounds"].split()
        return SpeedRange(SpeedClass(fields["class"]), (float(lo), float(hi)),
                          points)
    if kind == "infeasible":
        return Infeasible(fields["reason"], points)
    raise InvalidInputError(f"unknown advice kind {kind!r}")


def class_bounds_text(speed_class: SpeedClass) -> str:
    """Interval notation for a class, e.g. B -> [245,385)."""
    lo, hi = class_bounds(speed_class)
    left = "[" if speed_class in (SpeedClass.B, SpeedClass.C) else "("
    hi_text = "inf" if math.isinf(hi) else f"{hi:g}"
    return f"{left}{lo:g},{hi_text})"


def summary_line(advice: Advice) -> str:
    """One-line operator-facing rendering of an advice."""
    if isinstance(advice, MaxSpeed):
        return (f"MAX_SPEED {advice.v_star:g} "
                f"(first defect at {advice.first_defect_speed:g})")
    if isinstance(advice, SpeedRange):
        return f"RANGE {advice.speed_class.value} {class_bounds_text(advice.speed_class)}"
    return f"INFEASIBLE {advice.reason}"


def advice_to_dict(advice: Advice) -> dict:
    """JSON-ready mapping mirroring the text rendering."""
    payload: dict = {"kind": advice.kind}
    if isinstance(advice, MaxSpeed):
        payload["v_star"] = advice.v_star
        payload["first_defect_speed"] = advice.first_defect_speed
    elif isinstance(advice, SpeedRange):
        payload["class"] = advice.speed_class.value
        # JSON has no infinity; an unbounded class C upper edge becomes null.
        payload["bounds"] = [b if math.isfinite(b) else None for b in advice.bounds]
    else:
        payload["reason"] = advice.reason
    payload["trace"] = [{"v": p.v, "prediction": p.prediction} for p in advice.trace]
    return payload
