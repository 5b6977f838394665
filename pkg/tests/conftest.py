"""Shared fixtures: the seeded pipeline artifacts and small hand-built models.

Pipeline fixtures are session-scoped because dataset generation and network
training are the expensive steps; every test sees the same frozen run.
"""
import time

import numpy as np
import pytest

from pickline.config import load_config
from pickline.recbfn import (
    NETWORK_FEATURES,
    InputScaler,
    RecBFNetwork,
    RecBFUnit,
    fit_defect_network,
)
from pickline.records import DEFECT, NO_DEFECT, SpeedClass
from pickline.simulator import OracleDefectModel, generate_dataset
from pickline.tree import TREE_FEATURES, DecisionTree, Leaf
from pickline.workflow import train_models

CLAMP = (-0.25, 1.25)


@pytest.fixture(scope="session")
def config():
    return load_config()


@pytest.fixture(scope="session")
def dataset(config):
    return generate_dataset(
        1800, 0.75, config.seed_simulate,
        params=config.kinetics, geom=config.geometry, ranges=config.ranges,
        noise_amplitude=config.noise_amplitude)


@pytest.fixture(scope="session")
def timed_train(config, dataset):
    """(TrainResult, wall seconds) for the default 75/25 training run."""
    t0 = time.perf_counter()
    result = train_models(dataset.records, config)
    return result, time.perf_counter() - t0


@pytest.fixture(scope="session")
def timed_full_network(dataset):
    """(network, wall seconds) trained on every record of the seeded set."""
    t0 = time.perf_counter()
    network = fit_defect_network(dataset.records)
    return network, time.perf_counter() - t0


@pytest.fixture(scope="session")
def oracle(config, dataset):
    return OracleDefectModel(dataset.records[0], config.kinetics,
                             config.geometry)


def _box_unit(label, weight, v_interval=None):
    """Unit covering the whole clamp box, optionally gated on the v input."""
    lo, hi = CLAMP
    dims = len(NETWORK_FEATURES)
    s_lo, c_lo = [lo] * dims, [lo] * dims
    c_hi, s_hi = [hi] * dims, [hi] * dims
    if v_interval is not None:
        v = dims - 1
        s_lo[v] = c_lo[v] = v_interval[0]
        c_hi[v] = s_hi[v] = v_interval[1]
    return RecBFUnit(tuple(s_lo), tuple(c_lo), tuple(c_hi), tuple(s_hi),
                     label, weight)


def _hand_scaler():
    scaler = InputScaler(NETWORK_FEATURES)
    scaler.mins = np.array([50.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 100.0])
    scaler.maxs = np.array([100.0, 20.0, 250.0, 20.0, 250.0, 20.0, 250.0, 500.0])
    return scaler


def _network(units):
    return RecBFNetwork.from_units(units, _hand_scaler())


@pytest.fixture()
def flip_network():
    """Predicts no-defect below raw v = 300 and defect from 300 up.

    The scaler maps v over [100, 500], so scaled 0.5 is raw 300; the defect
    unit's box starts there with step edges and outweighs the all-clear unit.
    """
    return _network([
        _box_unit(NO_DEFECT, 1),
        _box_unit(DEFECT, 2, v_interval=(0.5, CLAMP[1])),
    ])


@pytest.fixture()
def clear_network():
    return _network([_box_unit(NO_DEFECT, 1)])


@pytest.fixture()
def defect_network():
    return _network([_box_unit(DEFECT, 1)])


@pytest.fixture()
def midband_network():
    """Defect only on raw v in [240, 280]; clear again above."""
    return _network([
        _box_unit(NO_DEFECT, 1),
        _box_unit(DEFECT, 2, v_interval=(0.35, 0.45)),
    ])


def _leaf_tree(speed_class):
    hist = tuple(5 if c is speed_class else 0
                 for c in (SpeedClass.A, SpeedClass.B, SpeedClass.C, SpeedClass.U))
    return DecisionTree(root=Leaf(speed_class, hist),
                        feature_names=TREE_FEATURES, seed=0, sample_count=5)


@pytest.fixture()
def leaf_tree_b():
    return _leaf_tree(SpeedClass.B)


@pytest.fixture()
def leaf_tree_u():
    return _leaf_tree(SpeedClass.U)


@pytest.fixture()
def advisory_inputs():
    """All twelve tree features, every value inside the documented bounds."""
    return {
        "t_s": 3.0, "W": 25.0,
        "T_1": 74.0, "T_2": 80.0, "T_3": 85.0, "T_rinse": 60.0,
        "HCl_1": 5.0, "Fe2_1": 5.0,
        "HCl_2": 10.0, "Fe2_2": 5.0,
        "HCl_3": 15.0, "Fe2_3": 5.0,
    }
