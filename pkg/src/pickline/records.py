"""Coil records, validation bounds, speed-class binning, and the CSV interchange format.

Every other module consumes the types defined here. All types are immutable
after construction and safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields as _dc_fields
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .errors import InvalidInputError, RecordValidationError, SchemaError

#: Column order of the interchange CSV. Header, order and spelling are fixed.
CSV_COLUMNS = (
    "W", "t_s", "w_s",
    "T_1", "T_2", "T_3", "T_rinse",
    "v",
    "HCl_1", "HCl_2", "HCl_3",
    "Fe2_1", "Fe2_2", "Fe2_3",
    "under_p",
)

CSV_HEADER = ",".join(CSV_COLUMNS)

#: Speed-class bin edges. Bins are half-open so every positive speed falls in
#: exactly one class: A = (0, 245), B = [245, 385), C = [385, inf).
SPEED_BREAKPOINTS = (245.0, 385.0)

#: Binary defect labels used by the network, the simulator oracle and the
#: advisory scan.
DEFECT = "defect"
NO_DEFECT = "no_defect"


class SpeedClass(str, Enum):
    """Admissible line-speed class, plus U for coils defective at any speed.

    U is assigned only by labeling logic (a coil predicted defective across
    the whole scan range); ``classify_speed`` never returns it.
    """

    A = "A"
    B = "B"
    C = "C"
    U = "U"


def classify_speed(v: float) -> SpeedClass:
    """Bin a line speed into class A, B or C.

    Raises InvalidInputError for non-positive or non-finite speeds.
    """
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise InvalidInputError(f"speed must be a number, got {type(v).__name__}")
    if not math.isfinite(v) or v <= 0:
        raise InvalidInputError(f"speed must be positive and finite, got {v!r}")
    if v < SPEED_BREAKPOINTS[0]:
        return SpeedClass.A
    if v < SPEED_BREAKPOINTS[1]:
        return SpeedClass.B
    return SpeedClass.C


def class_bounds(speed_class: SpeedClass) -> tuple[float, float]:
    """Speed interval covered by a class: (low, high), high may be inf.

    A covers (0, 245), B covers [245, 385), C covers [385, inf).
    U has no speed interval and raises InvalidInputError.
    """
    lo, hi = SPEED_BREAKPOINTS
    if speed_class == SpeedClass.A:
        return (0.0, lo)
    if speed_class == SpeedClass.B:
        return (lo, hi)
    if speed_class == SpeedClass.C:
        return (hi, math.inf)
    raise InvalidInputError("class U does not map to a speed interval")


@dataclass(frozen=True)
class Bound:
    """Admissible interval for one record field; endpoints may be open."""

    lo: float
    hi: float
    lo_open: bool = True
    hi_open: bool = True

    def admits(self, x: float) -> bool:
        if not math.isfinite(x):
            return False
        above = x > self.lo if self.lo_open else x >= self.lo
        below = x < self.hi if self.hi_open else x <= self.hi
        return above and below

    def describe(self) -> str:
        left = "(" if self.lo_open else "["
        right = ")" if self.hi_open else "]"
        return f"{left}{_fmt(self.lo)}, {_fmt(self.hi)}{right}"


def _fmt(x: float) -> str:
    return f"{x:g}"


#: Per-field admissible ranges. These are plant-tunable plausibility bounds,
#: kept in one table so a deployment can retune them without touching code.
#: Iron content may be zero (fresh bath); every other quantity is strictly
#: positive. Temperatures are in degrees C, speeds in line speed-units.
FIELD_BOUNDS: dict[str, Bound] = {
    "W": Bound(0.0, 60.0, hi_open=False),
    "t_s": Bound(0.0, 30.0, hi_open=False),
    "w_s": Bound(0.0, 2600.0, hi_open=False),
    "T_1": Bound(20.0, 100.0),
    "T_2": Bound(20.0, 100.0),
    "T_3": Bound(20.0, 100.0),
    "T_rinse": Bound(20.0, 100.0),
    "v": Bound(0.0, 600.0),
    "HCl_1": Bound(0.0, 20.0, hi_open=False),
    "HCl_2": Bound(0.0, 20.0, hi_open=False),
    "HCl_3": Bound(0.0, 20.0, hi_open=False),
    "Fe2_1": Bound(0.0, 250.0, lo_open=False),
    "Fe2_2": Bound(0.0, 250.0, lo_open=False),
    "Fe2_3": Bound(0.0, 250.0, lo_open=False),
}


@dataclass(frozen=True)
class Violation:
    """One failed validation check, naming the field and the bound it broke."""

    field: str
    value: float
    constraint: str

    def __str__(self) -> str:
        return f"{self.field}={self.value!r} violates {self.constraint}"


@dataclass(frozen=True)
class CoilRecord:
    """One coil's physical and process parameters plus its defect flag.

    W          coil weight, tonnes
    t_s        strip thickness, mm
    w_s        strip width, mm
    T_1..T_3   tank temperatures, degrees C
    T_rinse    rinse temperature, degrees C
    v          line speed, speed-units
    HCl_1..3   acid concentration per tank, wt%
    Fe2_1..3   dissolved iron per tank, g/L
    under_p    under-pickling defect flag
    """

    W: float
    t_s: float
    w_s: float
    T_1: float
    T_2: float
    T_3: float
    T_rinse: float
    v: float
    HCl_1: float
    HCl_2: float
    HCl_3: float
    Fe2_1: float
    Fe2_2: float
    Fe2_3: float
    under_p: bool

    def value(self, field: str) -> float:
        return getattr(self, field)

    def replace(self, **changes) -> "CoilRecord":
        data = {f.name: getattr(self, f.name) for f in _dc_fields(self)}
        data.update(changes)
        return CoilRecord(**data)


def record_violations(
    values: CoilRecord | Mapping[str, float],
    bounds: Mapping[str, Bound] | None = None,
) -> list[Violation]:
    """Collect every bound violation of a record-shaped value set.

    All fields are checked; violations are accumulated, not short-circuited.
    """
    bounds = FIELD_BOUNDS if bounds is None else bounds
    get = values.value if isinstance(values, CoilRecord) else values.__getitem__
    out: list[Violation] = []
    for name, bound in bounds.items():
        try:
            x = float(get(name))
        except (KeyError, TypeError, ValueError):
            out.append(Violation(name, float("nan"), "missing or non-numeric"))
            continue
        if not bound.admits(x):
            out.append(Violation(name, x, f"bound {bound.describe()}"))
    # Cross-field sanity: strip width must exceed thickness.
    try:
        w_s, t_s = float(get("w_s")), float(get("t_s"))
        if math.isfinite(w_s) and math.isfinite(t_s) and not w_s > t_s:
            out.append(Violation("w_s", w_s, f"w_s > t_s (t_s={t_s!r})"))
    except (KeyError, TypeError, ValueError):
        pass
    return out


def validate_record(
    values: CoilRecord | Mapping[str, float],
    bounds: Mapping[str, Bound] | None = None,
) -> CoilRecord:
    """Return a validated CoilRecord or raise RecordValidationError.

    The error lists every violated field and the bound it broke. Validating
    an already accepted record accepts it unchanged.
    """
    problems = record_violations(values, bounds)
    if problems:
        raise RecordValidationError(problems)
    if isinstance(values, CoilRecord):
        return values
    return CoilRecord(
        **{name: float(values[name]) for name in CSV_COLUMNS[:-1]},
        under_p=bool(int(values["under_p"])),
    )


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of validated coil records.

    ``provenance`` is "simulated" or "imported"; ``seed`` is set only for
    simulated data.
    """

    records: tuple[CoilRecord, ...]
    provenance: str = "imported"
    seed: int | None = None

    def __post_init__(self):
        if not self.records:
            raise InvalidInputError("dataset must contain at least one record")
        if self.provenance not in ("simulated", "imported"):
            raise InvalidInputError(f"unknown provenance {self.provenance!r}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def defect_fraction(self) -> float:
        return sum(1 for r in self.records if r.under_p) / len(self.records)


def _format_number(x: float) -> str:
    # repr round-trips float64 exactly and is stable, which keeps repeated
    # exports byte-identical.
    return repr(float(x))


def write_csv(records: Iterable[CoilRecord], path: str | Path) -> None:
    """Write records in the fixed interchange format (header, '.', '\\n')."""
    lines = [CSV_HEADER]
    for r in records:
        cells = [_format_number(r.value(c)) for c in CSV_COLUMNS[:-1]]
        cells.append("1" if r.under_p else "0")
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def read_csv(path: str | Path, validate: bool = True) -> Dataset:
    """Load a dataset from the interchange CSV.

    The header must match the schema exactly; a mismatch raises SchemaError
    naming the offending column. With ``validate`` (the default) every row
    must pass ``validate_record``.
    """
    text = Path(path).read_text(encoding="ascii")
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if not lines:
        raise SchemaError("empty CSV file")
    header = tuple(lines[0].strip().split(","))
    if header != CSV_COLUMNS:
        missing = [c for c in CSV_COLUMNS if c not in header]
        extra = [c for c in header if c not in CSV_COLUMNS]
        if missing:
            raise SchemaError(f"missing column {missing[0]!r}")
        if extra:
            raise SchemaError(f"unexpected column {extra[0]!r}")
        raise SchemaError("columns are present but out of order")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise SchemaError(f"line {lineno}: expected {len(CSV_COLUMNS)} cells, got {len(cells)}")
        raw: dict[str, float] = {}
        for name, cell in zip(CSV_COLUMNS, cells):
            try:
                raw[name] = float(cell)
            except ValueError as exc:
                raise SchemaError(f"line {lineno}: column {name!r} is not numeric: {cell!r}") from exc
        if raw["under_p"] not in (0.0, 1.0):
            raise SchemaError(f"line {lineno}: under_p must be 0 or 1, got {cells[-1]!r}")
        rec = CoilRecord(
            **{name: raw[name] for name in CSV_COLUMNS[:-1]},
            under_p=bool(raw["under_p"]),
        )
        if validate:
            validate_record(rec)
        records.append(rec)
    return Dataset(records=tuple(records), provenance="imported")
