"""Acceptance gates for the toolkit, one test per contract.

Covered here: reproduction of the published per-class F-measures, defect
network convergence and threshold separation on the seeded dataset, holdout
quality bounds for the network and the tree, split-search equivalence with an
exhaustive reference, advisor soundness on random fixtures, kinetics-oracle
monotonicity, byte-level rerun determinism, and persistence round-trips.
The operator-console consistency gate lives in the frontend's own test suite.
"""
import time

import numpy as np

from pickline import cli
from pickline.advisor import Infeasible, MaxSpeed, SpeedRange, advise, scan_speeds
from pickline.metrics import f_measure
from pickline.records import DEFECT, NO_DEFECT
from pickline.recbfn import NETWORK_FEATURES, load_network, save_network
from pickline.simulator import OracleDefectModel
from pickline.tree import TREE_FEATURES, best_split, label_records, load_tree, save_tree

from .test_tree import brute_force_split, reference_gain_ratio

#: Published per-class (precision, recall, F) rows this implementation's
#: F-measure formula must reproduce.
PUBLISHED_ROWS = (
    ("U", 0.961, 0.958, 0.959),
    ("A", 0.934, 0.948, 0.941),
    ("B", 0.913, 0.961, 0.936),
)


def network_matrix(records):
    return np.array([[r.value(name) for name in NETWORK_FEATURES]
                     for r in records], dtype=float)


def trapezoid_memberships(network, X_scaled):
    """Reference activation of every unit at every row, written out plainly."""
    n, d = X_scaled.shape
    mu = np.ones((n, network.unit_count))
    for j in range(network.unit_count):
        for k in range(d):
            x = X_scaled[:, k]
            s_lo, c_lo = network.s_lo[j, k], network.c_lo[j, k]
            c_hi, s_hi = network.c_hi[j, k], network.s_hi[j, k]
            left = (x >= c_lo).astype(float) if c_lo == s_lo \
                else np.clip((x - s_lo) / (c_lo - s_lo), 0.0, 1.0)
            right = (x <= c_hi).astype(float) if s_hi == c_hi \
                else np.clip((s_hi - x) / (s_hi - c_hi), 0.0, 1.0)
            mu[:, j] = np.minimum(mu[:, j], np.minimum(left, right))
    return mu


def test_published_f_measures_reproduced():
    for cls, p, r, published in PUBLISHED_ROWS:
        computed = f_measure(p, r)
        assert abs(computed - published) <= 0.0005, \
            f"class {cls}: f({p}, {r}) = {computed:.6f}, published {published}"
    print("PASS published F-measure rows reproduced within 0.0005")


def test_network_training_converges_and_separates_every_pattern(
        dataset, timed_full_network):
    network, seconds = timed_full_network
    assert network.converged, \
        f"training left {network.residual_conflicts} residual conflicts"
    assert network.epochs <= 20, f"took {network.epochs} epochs"
    assert seconds < 60.0, f"training took {seconds:.1f}s"

    X = network.scaler.transform(network_matrix(dataset.records))
    mu = trapezoid_memberships(network, X)
    defect_units = np.array([lbl == 1 for lbl in network.labels])
    own_is_defect = np.array([r.under_p for r in dataset.records])
    own_max = np.where(own_is_defect,
                       mu[:, defect_units].max(axis=1),
                       mu[:, ~defect_units].max(axis=1))
    other_max = np.where(own_is_defect,
                         mu[:, ~defect_units].max(axis=1),
                         mu[:, defect_units].max(axis=1))
    satisfied = (own_max >= network.theta_plus) & (other_max < network.theta_minus)
    assert satisfied.all(), \
        f"{int((~satisfied).sum())} of {len(satisfied)} patterns violate a threshold"
    print(f"PASS network converged in {network.epochs} epochs ({seconds:.1f}s), "
          f"{len(satisfied)}/{len(satisfied)} patterns separated")


def test_network_holdout_misclassification_within_five_percent(timed_train):
    result, seconds = timed_train
    predicted = result.network.predict_batch(
        network_matrix(result.validation_records))
    actual = [DEFECT if r.under_p else NO_DEFECT
              for r in result.validation_records]
    wrong = sum(1 for p, a in zip(predicted, actual) if p != a)
    rate = wrong / len(actual)
    assert rate <= 0.05, f"misclassification {rate:.4f} on {len(actual)} records"
    assert seconds < 60.0, f"training took {seconds:.1f}s"
    print(f"PASS holdout misclassification {rate:.4f} "
          f"({wrong}/{len(actual)}, training {seconds:.1f}s)")


def test_split_search_matches_exhaustive_reference():
    rng = np.random.default_rng(20240814)
    start = time.perf_counter()
    for trial in range(200):
        n = int(rng.integers(5, 31))
        d = int(rng.integers(1, 5))
        if rng.random() < 0.5:
            X = rng.uniform(0.0, 10.0, size=(n, d))
        else:
            X = rng.integers(0, 5, size=(n, d)).astype(float)
        y = rng.integers(0, 4, size=n)
        got = best_split(X, y)
        want = brute_force_split(X, y)
        if got == want:
            continue
        assert got is not None and want is not None, \
            f"trial {trial}: {got} vs {want}"
        spread = abs(reference_gain_ratio(X, y, *got)
                     - reference_gain_ratio(X, y, *want))
        assert spread <= 1e-12, f"trial {trial}: gain ratios differ by {spread}"
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    print(f"PASS split search matched the reference on 200 datasets "
          f"({elapsed:.1f}s)")


def test_tree_holdout_accuracy_at_least_seventy_percent(config, timed_train):
    result, _ = timed_train
    start = time.perf_counter()
    labels = label_records(result.validation_records, result.network,
                           config.grid)
    scored = [(record, cls) for record, cls
              in zip(result.validation_records, labels) if cls is not None]
    correct = sum(
        1 for record, cls in scored
        if result.tree.predict(
            {name: record.value(name) for name in TREE_FEATURES}) is cls)
    accuracy = correct / len(scored)
    elapsed = time.perf_counter() - start
    assert accuracy >= 0.70, f"accuracy {accuracy:.4f} on {len(scored)} records"
    assert elapsed < 30.0, f"took {elapsed:.1f}s"
    print(f"PASS tree holdout accuracy {accuracy:.4f} "
          f"({correct}/{len(scored)}, {elapsed:.1f}s)")


def test_advisor_soundness_on_one_hundred_fixtures(config, timed_train):
    result, _ = timed_train
    fixtures = result.validation_records[:100]
    assert len(fixtures) == 100
    start = time.perf_counter()
    kinds = {"max_speed": 0, "speed_range": 0, "infeasible": 0}
    for record in fixtures:
        inputs = {name: record.value(name) for name in TREE_FEATURES}
        advice = advise(result.tree, result.network, inputs, config.grid)
        kinds[advice.kind] += 1
        by_speed = {point.v: point.prediction for point in advice.trace}
        if isinstance(advice, MaxSpeed):
            assert by_speed[advice.v_star] == NO_DEFECT
            assert by_speed[advice.first_defect_speed] == DEFECT
            assert advice.first_defect_speed == advice.v_star + config.grid.step
        elif isinstance(advice, Infeasible):
            assert advice.trace[0].prediction == DEFECT
        else:
            assert isinstance(advice, SpeedRange)
            assert all(p.prediction == NO_DEFECT for p in advice.trace)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    print(f"PASS advisor sound on 100 fixtures {kinds} ({elapsed:.1f}s)")


def test_noise_free_oracle_traces_are_monotone(config, dataset):
    start = time.perf_counter()
    for record in dataset.records[:1000]:
        oracle = OracleDefectModel(record, config.kinetics, config.geometry)
        labels = [point.prediction
                  for point in scan_speeds(oracle, record, config.grid)]
        flip = labels.index(DEFECT) if DEFECT in labels else len(labels)
        assert all(lbl == NO_DEFECT for lbl in labels[:flip])
        assert all(lbl == DEFECT for lbl in labels[flip:])
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    print(f"PASS 1000 noise-free traces monotone ({elapsed:.1f}s)")


def test_simulate_and_train_reruns_are_byte_identical(tmp_path, config):
    first_csv = tmp_path / "first.csv"
    second_csv = tmp_path / "second.csv"
    assert cli.main(["simulate", "-n", "600", "-o", str(first_csv)]) == 0
    assert cli.main(["simulate", "-n", "600", "-o", str(second_csv)]) == 0
    assert first_csv.read_bytes() == second_csv.read_bytes()

    first_dir = tmp_path / "models-a"
    second_dir = tmp_path / "models-b"
    assert cli.main(["train", "--data", str(first_csv),
                     "--out-dir", str(first_dir)]) == 0
    assert cli.main(["train", "--data", str(first_csv),
                     "--out-dir", str(second_dir)]) == 0
    for path_a, path_b in zip(config.model_paths(first_dir),
                              config.model_paths(second_dir)):
        assert path_a.read_bytes() == path_b.read_bytes(), path_a.name
    print("PASS simulate and train reruns byte-identical")


def test_persistence_round_trip_preserves_every_prediction(tmp_path,
                                                           timed_train):
    result, _ = timed_train
    tree_path = tmp_path / "tree.model"
    network_path = tmp_path / "network.model"
    save_tree(result.tree, tree_path)
    save_network(result.network, network_path)
    tree = load_tree(tree_path)
    network = load_network(network_path)

    rng = np.random.default_rng(99)
    lows = {"W": 0.5, "t_s": 0.1, "T_1": 21.0, "T_2": 21.0, "T_3": 21.0,
            "T_rinse": 21.0, "HCl_1": 0.1, "HCl_2": 0.1, "HCl_3": 0.1,
            "Fe2_1": 0.0, "Fe2_2": 0.0, "Fe2_3": 0.0, "v": 1.0}
    highs = {"W": 60.0, "t_s": 30.0, "T_1": 99.0, "T_2": 99.0, "T_3": 99.0,
             "T_rinse": 99.0, "HCl_1": 20.0, "HCl_2": 20.0, "HCl_3": 20.0,
             "Fe2_1": 249.0, "Fe2_2": 249.0, "Fe2_3": 249.0, "v": 599.0}
    for _ in range(1000):
        inputs = {name: float(rng.uniform(lows[name], highs[name]))
                  for name in TREE_FEATURES}
        assert tree.predict(inputs) is result.tree.predict(inputs)

    X = np.column_stack([rng.uniform(lows[name], highs[name], size=1000)
                         for name in NETWORK_FEATURES])
    assert network.predict_batch(X) == result.network.predict_batch(X)
    scores_new = network.class_scores_scaled(network.scaler.transform(X))
    scores_old = result.network.class_scores_scaled(
        result.network.scaler.transform(X))
    assert np.array_equal(scores_new, scores_old)
    print("PASS persistence round trip exact on 1000 fuzz inputs")
