"""Synthetic pickling-line kinetics and labeled dataset generation.

The dissolution model is an Arrhenius-style rate summed over the three acid
tanks. It stands in for plant data: scale removal speeds up with acid
concentration and temperature, slows down as dissolved iron accumulates, and
the required contact time grows with scale (strip) thickness. A coil is
under-pickled when its residence time in the tanks falls short of the
required pickling time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import GenerationBudgetError, InvalidInputError, SaturatedBathError
from .records import DEFECT, NO_DEFECT, CoilRecord, Dataset, record_violations

TANK_COUNT = 3
KELVIN_OFFSET = 273.15


@dataclass(frozen=True)
class LineGeometry:
    """Tank lengths in metres; the rinse section takes no part in kinetics."""

    tank_lengths: tuple[float, float, float] = (100.0, 100.0, 100.0)

    def __post_init__(self):
        if len(self.tank_lengths) != TANK_COUNT:
            raise InvalidInputError(f"expected {TANK_COUNT} tank lengths")
        if any(not (L > 0 and math.isfinite(L)) for L in self.tank_lengths):
            raise InvalidInputError("tank lengths must be strictly positive")

    @property
    def total_length(self) -> float:
        return float(sum(self.tank_lengths))


@dataclass(frozen=True)
class KineticsParams:
    """Coefficients of the dissolution-rate model.

    rate_constant           base rate scale (k0)
    activation_temperature  temperature sensitivity in kelvin (E)
    acid_exponent           acid concentration exponent (n), in [0.5, 2]
    iron_inhibition         per g/L slowdown from dissolved iron (beta)
    thickness_factor        required time per mm of strip thickness (gamma)
    """

    rate_constant: float = 55.0
    activation_temperature: float = 3000.0
    acid_exponent: float = 2.0
    iron_inhibition: float = 0.004
    thickness_factor: float = 1.0

    def __post_init__(self):
        for name in ("rate_constant", "activation_temperature", "acid_exponent",
                     "iron_inhibition", "thickness_factor"):
            x = getattr(self, name)
            if not (x > 0 and math.isfinite(x)):
                raise InvalidInputError(f"{name} must be strictly positive, got {x!r}")
        if not 0.5 <= self.acid_exponent <= 2.0:
            raise InvalidInputError(f"acid_exponent must lie in [0.5, 2], got {self.acid_exponent!r}")


def _tank_rates(record: CoilRecord, params: KineticsParams) -> list[float]:
    rates = []
    for k in (1, 2, 3):
        acid = record.value(f"HCl_{k}")
        temp_k = record.value(f"T_{k}") + KELVIN_OFFSET
        iron = record.value(f"Fe2_{k}")
        iron_term = max(0.0, 1.0 - params.iron_inhibition * iron)
        rate = (params.rate_constant
                * acid ** params.acid_exponent
                * math.exp(-params.activation_temperature / temp_k)
                * iron_term)
        rates.append(rate)
    return rates


def required_pickling_time(record: CoilRecord, params: KineticsParams) -> float:
    """Contact time (min) needed to dissolve the scale on a validated record.

    t_req = gamma * t_s / sum_k(k0 * HCl_k^n * exp(-E / T_k[K]) * (1 - beta * Fe2_k)+)

    Raises SaturatedBathError when iron saturates every tank (all rate terms
    zero), since no finite contact time would pickle the strip.
    """
    total_rate = sum(_tank_rates(record, params))
    if total_rate <= 0.0:
        raise SaturatedBathError("all tank rates are zero (iron-saturated baths)")
    return params.thickness_factor * record.t_s / total_rate


def residence_time(v: float, geom: LineGeometry) -> float:
    """Time (min) a strip portion spends in the acid tanks at line speed v."""
    if not (v > 0 and math.isfinite(v)):
        raise InvalidInputError(f"line speed must be positive and finite, got {v!r}")
    return geom.total_length / v


def defect_boundary_speed(record: CoilRecord, params: KineticsParams,
                          geom: LineGeometry) -> float:
    """Noise-free boundary speed: faster than this under-pickles the coil."""
    return geom.total_length / required_pickling_time(record, params)


def label_sample(record: CoilRecord, params: KineticsParams, geom: LineGeometry,
                 noise_seed: int, noise_amplitude: float = 0.05) -> bool:
    """Defect flag for a record: residence time short of the required time.

    The comparison threshold gets a small multiplicative perturbation drawn
    from U(-amplitude, +amplitude) with the given seed, so the boundary is
    stochastic but reproducible. Amplitude 0 gives the exact noise-free
    oracle.
    """
    t_req = required_pickling_time(record, params)
    t_res = residence_time(record.v, geom)
    if noise_amplitude < 0:
        raise InvalidInputError("noise amplitude must be non-negative")
    eps = 0.0
    if noise_amplitude > 0:
        rng = np.random.default_rng(noise_seed)
        eps = rng.uniform(-noise_amplitude, noise_amplitude)
    return bool(t_res < t_req * (1.0 + eps))


@dataclass(frozen=True)
class Recipe:
    """One line operating point: a temperature campaign and a tank 2 acid
    recipe, each drawn uniformly from a narrow setpoint band."""

    T_3: tuple[float, float]
    HCl_2: tuple[float, float]
    weight: float


@dataclass(frozen=True)
class SamplingRanges:
    """Per-field sampling distributions for the dataset generator.

    The line cycles through a small set of operating recipes (temperature
    campaign paired with a tank 2 acid strength), picked with the stated
    weights; the remaining bath fields are held near their setpoints. Tank 1
    and 2 temperatures track the tank 3 setpoint through fixed offsets plus a
    small jitter, matching a cascade-heated line. Line speed is tied to each
    coil's noise-free boundary speed: under normal practice operators run at
    ``safe_speed_band`` times the admissible maximum, while overspeed
    incidents land in ``overspeed_band``. With probability
    ``degraded_probability`` a coil meets a spent bath whose tank 2 and 3
    iron loadings sit past the inhibition knee; such a coil under-pickles at
    any speed, and its speed is drawn uniformly from ``degraded_speed``.
    """

    W: tuple[float, float] = (10.0, 40.0)
    t_s: tuple[float, float] = (2.97, 3.03)
    w_s: tuple[float, float] = (800.0, 2000.0)
    T_rinse: tuple[float, float] = (40.0, 80.0)
    HCl_1: tuple[float, float] = (4.75, 5.25)
    HCl_3: tuple[float, float] = (14.9, 15.1)
    Fe2: tuple[float, float] = (0.0, 10.0)
    T_1_offset: tuple[float, float] = (-12.0, 0.6)
    T_2_offset: tuple[float, float] = (-6.0, 0.6)
    recipes: tuple[Recipe, ...] = (
        Recipe(T_3=(64.75, 66.0), HCl_2=(8.9, 9.1), weight=0.35),
        Recipe(T_3=(64.75, 66.0), HCl_2=(14.0, 14.2), weight=0.35),
        Recipe(T_3=(94.75, 96.25), HCl_2=(8.9, 9.1), weight=0.30),
    )
    safe_speed_band: tuple[float, float] = (0.84, 0.95)
    overspeed_band: tuple[float, float] = (1.15, 1.32)
    degraded_probability: float = 0.08
    degraded_Fe2: tuple[float, float] = (235.0, 248.0)
    degraded_speed: tuple[float, float] = (104.0, 500.0)


def _draw_record_fields(rng: np.random.Generator, ranges: SamplingRanges,
                        params: KineticsParams, geom: LineGeometry) -> dict[str, float]:
    f: dict[str, float] = {}
    f["W"] = rng.uniform(*ranges.W)
    f["t_s"] = rng.uniform(*ranges.t_s)
    f["w_s"] = rng.uniform(*ranges.w_s)
    total = sum(r.weight for r in ranges.recipes)
    pick = rng.uniform(0.0, total)
    acc = 0.0
    recipe = ranges.recipes[-1]
    for r in ranges.recipes:
        acc += r.weight
        if pick < acc:
            recipe = r
            break
    f["T_3"] = rng.uniform(*recipe.T_3)
    off1, jit1 = ranges.T_1_offset
    off2, jit2 = ranges.T_2_offset
    f["T_1"] = f["T_3"] + off1 + rng.uniform(-jit1, jit1)
    f["T_2"] = f["T_3"] + off2 + rng.uniform(-jit2, jit2)
    f["T_rinse"] = rng.uniform(*ranges.T_rinse)
    f["HCl_1"] = rng.uniform(*ranges.HCl_1)
    f["HCl_2"] = rng.uniform(*recipe.HCl_2)
    f["HCl_3"] = rng.uniform(*ranges.HCl_3)
    f["Fe2_1"] = rng.uniform(*ranges.Fe2)
    degraded = rng.uniform() < ranges.degraded_probability
    if degraded:
        f["Fe2_2"] = rng.uniform(*ranges.degraded_Fe2)
        f["Fe2_3"] = rng.uniform(*ranges.degraded_Fe2)
        f["v"] = rng.uniform(*ranges.degraded_speed)
    else:
        f["Fe2_2"] = rng.uniform(*ranges.Fe2)
        f["Fe2_3"] = rng.uniform(*ranges.Fe2)
        probe = CoilRecord(**f, v=1.0, under_p=False)
        v_boundary = defect_boundary_speed(probe, params, geom)
        lo_w = ranges.safe_speed_band[1] - ranges.safe_speed_band[0]
        hi_w = ranges.overspeed_band[1] - ranges.overspeed_band[0]
        pick = rng.uniform(0.0, lo_w + hi_w)
        if pick < lo_w:
            ratio = ranges.safe_speed_band[0] + pick
        else:
            ratio = ranges.overspeed_band[0] + (pick - lo_w)
        f["v"] = ratio * v_boundary
    return f


def generate_dataset(
    n: int,
    target_defect_fraction: float,
    seed: int,
    params: KineticsParams | None = None,
    geom: LineGeometry | None = None,
    ranges: SamplingRanges | None = None,
    noise_amplitude: float = 0.05,
) -> Dataset:
    """Generate n validated, labeled records at the requested class balance.

    Records are drawn from the documented distributions and accepted against
    per-class quotas until the defect share lands within two percentage
    points of the target (the quota construction keeps it within one record
    of ``round(n * fraction)``). Deterministic for a fixed seed; per-draw
    RNG streams are split by draw index, so parallel generation would
    produce the same dataset.

    Raises GenerationBudgetError after 100 * n draws without filling both
    quotas.
    """
    if n < 100:
        raise InvalidInputError(f"need at least 100 records, got {n}")
    if not 0.0 < target_defect_fraction < 1.0:
        raise InvalidInputError("defect fraction must lie strictly between 0 and 1")
    params = params or KineticsParams()
    geom = geom or LineGeometry()
    ranges = ranges or SamplingRanges()

    need_defect = round(n * target_defect_fraction)
    need_clean = n - need_defect
    budget = 100 * n
    accepted: list[CoilRecord] = []
    draw = 0
    while len(accepted) < n:
        if draw >= budget:
            got_defect = round(n * target_defect_fraction) - need_defect
            achieved = got_defect / max(1, len(accepted))
            raise GenerationBudgetError(
                f"gave up after {draw} draws with {len(accepted)} records "
                f"(defect share {achieved:.3f}, target {target_defect_fraction:.3f})",
                achieved_fraction=achieved,
                draws=draw,
            )
        field_rng = np.random.default_rng(np.random.SeedSequence([seed, draw, 0]))
        noise_seed = int(np.random.SeedSequence([seed, draw, 1]).generate_state(1)[0])
        fields = _draw_record_fields(field_rng, ranges, params, geom)
        draw += 1
        probe = CoilRecord(**fields, under_p=False)
        if record_violations(probe):
            continue
        label = label_sample(probe, params, geom, noise_seed, noise_amplitude)
        if label and need_defect > 0:
            need_defect -= 1
        elif not label and need_clean > 0:
            need_clean -= 1
        else:
            continue
        accepted.append(probe.replace(under_p=label))
    return Dataset(records=tuple(accepted), provenance="simulated", seed=seed)


class OracleDefectModel:
    """Noise-free defect predictor with the same call surface as the network.

    Wraps the kinetics formula around a base record: ``predict`` takes the
    eight advisory inputs (T_3, HCl_1, Fe2_1, HCl_2, Fe2_2, HCl_3, Fe2_3, v)
    and falls back to the base record for everything else (t_s, T_1, T_2).
    Confidence scores are crisp 0/1.
    """

    feature_names = ("T_3", "HCl_1", "Fe2_1", "HCl_2", "Fe2_2", "HCl_3", "Fe2_3", "v")

    def __init__(self, base_record: CoilRecord, params: KineticsParams,
                 geom: LineGeometry):
        self.base_record = base_record
        self.params = params
        self.geom = geom

    def _record_for(self, x: Sequence[float]) -> CoilRecord:
        if len(x) != len(self.feature_names):
            raise InvalidInputError(f"expected {len(self.feature_names)} inputs, got {len(x)}")
        changes = dict(zip(self.feature_names, (float(xi) for xi in x)))
        return self.base_record.replace(**changes)

    def predict(self, x: Sequence[float]) -> tuple[str, dict[str, float]]:
        rec = self._record_for(x)
        defect = residence_time(rec.v, self.geom) < required_pickling_time(rec, self.params)
        label = DEFECT if defect else NO_DEFECT
        return label, {DEFECT: 1.0 if defect else 0.0, NO_DEFECT: 0.0 if defect else 1.0}

    def predict_batch(self, X: np.ndarray) -> list[str]:
        return [self.predict(row)[0] for row in np.asarray(X, dtype=float)]
