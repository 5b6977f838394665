"""Toolkit configuration: packaged defaults overridden by an optional INI file.

The packaged ``data/default.ini`` carries a complete, valid configuration.
A user file (argument or PICKLINE_CONFIG environment variable) is layered on
top, so it only needs the keys it changes.
"""
from __future__ import annotations

import configparser
import os
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .advisor import ScanGrid
from .errors import ConfigurationError, PicklineError
from .simulator import KineticsParams, LineGeometry, Recipe, SamplingRanges
from .tree import TreeConfig

CONFIG_ENV_VAR = "PICKLINE_CONFIG"
BIND_ENV_VAR = "PICKLINE_BIND"


@dataclass(frozen=True)
class AppConfig:
    kinetics: KineticsParams
    geometry: LineGeometry
    ranges: SamplingRanges
    noise_amplitude: float
    grid: ScanGrid
    theta_plus: float
    theta_minus: float
    max_epochs: int
    tree: TreeConfig
    train_fraction: float
    seed_simulate: int
    seed_split: int
    tree_file: str
    network_file: str
    report_file: str

    def model_paths(self, directory: str | Path) -> tuple[Path, Path, Path]:
        base = Path(directory)
        return (base / self.tree_file, base / self.network_file,
                base / self.report_file)


def _pair(raw: str) -> tuple[float, float]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ConfigurationError(f"expected two comma-separated numbers, got {raw!r}")
    return float(parts[0]), float(parts[1])


def _recipes(raw: str) -> tuple[Recipe, ...]:
    recipes = []
    for item in raw.split(","):
        parts = [p.strip() for p in item.split(":")]
        if len(parts) != 5:
            raise ConfigurationError(
                f"each recipe needs five colon-separated numbers, got {item.strip()!r}")
        values = [float(p) for p in parts]
        recipes.append(Recipe(T_3=(values[0], values[1]),
                              HCl_2=(values[2], values[3]),
                              weight=values[4]))
    if not recipes:
        raise ConfigurationError("recipes must list at least one recipe")
    return tuple(recipes)


def _read_layers(path: str | Path | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    defaults = resources.files("pickline").joinpath("data/default.ini")
    parser.read_string(defaults.read_text(encoding="ascii"))
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigurationError(f"configuration file not found: {path}")
        try:
            with path.open(encoding="utf-8") as fh:
                parser.read_file(fh)
        except configparser.Error as exc:
            raise ConfigurationError(f"cannot parse {path}: {exc}") from exc
    return parser


def load_config(path: str | Path | None = None,
                env: dict | None = None) -> AppConfig:
    """Build the validated application configuration.

    Module-level dataclasses enforce their own preconditions; any violation
    surfaces as a ConfigurationError naming the offending value.
    """
    env = os.environ if env is None else env
    if path is None:
        path = env.get(CONFIG_ENV_VAR) or None
    parser = _read_layers(path)
    try:
        sim = parser["simulator"]
        kinetics = KineticsParams(
            rate_constant=sim.getfloat("rate_constant"),
            activation_temperature=sim.getfloat("activation_temperature"),
            acid_exponent=sim.getfloat("acid_exponent"),
            iron_inhibition=sim.getfloat("iron_inhibition"),
            thickness_factor=sim.getfloat("thickness_factor"),
        )
        lengths = tuple(float(p.strip()) for p in sim.get("tank_lengths").split(","))
        if len(lengths) != 3:
            raise ConfigurationError("tank_lengths must list three lengths")
        geometry = LineGeometry(tank_lengths=lengths)
        noise_amplitude = sim.getfloat("noise_amplitude")
        if noise_amplitude < 0:
            raise ConfigurationError("noise_amplitude must be non-negative")

        smp = parser["sampling"]
        ranges = SamplingRanges(
            W=_pair(smp.get("W")),
            t_s=_pair(smp.get("t_s")),
            w_s=_pair(smp.get("w_s")),
            T_rinse=_pair(smp.get("T_rinse")),
            HCl_1=_pair(smp.get("HCl_1")),
            HCl_3=_pair(smp.get("HCl_3")),
            Fe2=_pair(smp.get("Fe2")),
            T_1_offset=_pair(smp.get("T_1_offset")),
            T_2_offset=_pair(smp.get("T_2_offset")),
            recipes=_recipes(smp.get("recipes")),
            safe_speed_band=_pair(smp.get("safe_speed_band")),
            overspeed_band=_pair(smp.get("overspeed_band")),
            degraded_probability=smp.getfloat("degraded_probability"),
            degraded_Fe2=_pair(smp.get("degraded_Fe2")),
            degraded_speed=_pair(smp.get("degraded_speed")),
        )

        grd = parser["grid"]
        grid = ScanGrid(v_min=grd.getfloat("v_min"), v_max=grd.getfloat("v_max"),
                        step=grd.getfloat("step"))

        net = parser["recbfn"]
        theta_plus = net.getfloat("theta_plus")
        theta_minus = net.getfloat("theta_minus")
        max_epochs = net.getint("max_epochs")
        if not 0.0 < theta_minus < theta_plus <= 1.0:
            raise ConfigurationError(
                "recbfn thresholds must satisfy 0 < theta_minus < theta_plus <= 1")
        if max_epochs < 1:
            raise ConfigurationError("max_epochs must be at least 1")

        trc = parser["tree"]
        tree = TreeConfig(pruning=trc.getboolean("pruning"),
                          confidence=trc.getfloat("confidence"),
                          min_leaf=trc.getint("min_leaf"))
        if not 0.0 < tree.confidence < 0.5:
            raise ConfigurationError("tree confidence must lie in (0, 0.5)")
        if tree.min_leaf < 1:
            raise ConfigurationError("tree min_leaf must be at least 1")

        spl = parser["split"]
        train_fraction = spl.getfloat("train_fraction")
        if not 0.0 < train_fraction < 1.0:
            raise ConfigurationError("train_fraction must lie strictly in (0, 1)")

        seeds = parser["seeds"]
        seed_simulate = seeds.getint("simulate")
        seed_split = seeds.getint("split")

        paths = parser["paths"]
        tree_file = paths.get("tree_file")
        network_file = paths.get("network_file")
        report_file = paths.get("report_file")
    except (configparser.Error, KeyError, ValueError) as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from exc
    except ConfigurationError:
        raise
    except PicklineError as exc:
        raise ConfigurationError(f"invalid configuration: {exc}") from exc

    if len({tree_file, network_file, report_file}) != 3:
        raise ConfigurationError("tree_file, network_file and report_file must differ")
    return AppConfig(
        kinetics=kinetics, geometry=geometry, ranges=ranges,
        noise_amplitude=noise_amplitude, grid=grid,
        theta_plus=theta_plus, theta_minus=theta_minus, max_epochs=max_epochs,
        tree=tree, train_fraction=train_fraction,
        seed_simulate=seed_simulate, seed_split=seed_split,
        tree_file=tree_file, network_file=network_file, report_file=report_file,
    )
