"""End-to-end training and evaluation pipeline shared by the CLI and tests.

Training order matters: the defect network is trained first, because the
four-class labels of the tree's training set depend on it (class U means the
network predicts a defect at every scanned speed).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .config import AppConfig
from .metrics import GlobalReport, evaluate_global, stratified_split
from .records import CoilRecord
from .recbfn import RecBFNetwork, fit_defect_network, load_network, save_network
from .tree import (
    DecisionTree,
    features_matrix,
    label_records,
    load_tree,
    save_tree,
    train_tree,
)


@dataclass(frozen=True)
class TrainResult:
    tree: DecisionTree
    network: RecBFNetwork
    train_records: list[CoilRecord]
    validation_records: list[CoilRecord]
    labeled_count: int
    report: str


def train_models(records: Sequence[CoilRecord], config: AppConfig) -> TrainResult:
    """Split, train the network, label, train the tree, report."""
    train, validation = stratified_split(records, config.train_fraction,
                                         config.seed_split)
    network = fit_defect_network(train, theta_plus=config.theta_plus,
                                 theta_minus=config.theta_minus,
                                 max_epochs=config.max_epochs)
    labels = label_records(train, network, config.grid)
    kept = [i for i, cls in enumerate(labels) if cls is not None]
    kept_records = [train[i] for i in kept]
    kept_labels = [labels[i] for i in kept]
    tree = train_tree(features_matrix(kept_records), kept_labels,
                      config=config.tree, seed=config.seed_split)
    report = "\n".join([
        f"training records: {len(train)}",
        f"validation records: {len(validation)}",
        f"class-labeled training records: {len(kept_records)} "
        f"({len(train) - len(kept_records)} defective records outside class U excluded)",
        f"tree depth: {tree.depth}",
        f"tree size: {tree.size}",
        f"network units: {network.unit_count}",
        f"network epochs: {network.epochs}",
        f"network converged: {'yes' if network.converged else 'no'}",
        f"residual conflicts: {network.residual_conflicts}",
    ]) + "\n"
    return TrainResult(tree=tree, network=network, train_records=train,
                       validation_records=validation,
                       labeled_count=len(kept_records), report=report)


def save_models(result: TrainResult, directory: str | Path,
                config: AppConfig) -> tuple[Path, Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tree_path, network_path, report_path = config.model_paths(directory)
    save_tree(result.tree, tree_path)
    save_network(result.network, network_path)
    report_path.write_text(result.report, encoding="ascii", newline="\n")
    return tree_path, network_path, report_path


def load_models(directory: str | Path,
                config: AppConfig) -> tuple[DecisionTree, RecBFNetwork]:
    tree_path, network_path, _ = config.model_paths(directory)
    return load_tree(tree_path), load_network(network_path)


def evaluate_validation(tree: DecisionTree, network: RecBFNetwork,
                        records: Sequence[CoilRecord], config: AppConfig,
                        full: bool = False, label_model=None) -> GlobalReport:
    """Score the advisory path on the re-derived validation slice.

    With ``full`` the whole dataset is evaluated instead; the split seed is
    otherwise reused so evaluation sees exactly the rows training held out.
    """
    if full:
        subset: Sequence[CoilRecord] = records
    else:
        _, subset = stratified_split(records, config.train_fraction,
                                     config.seed_split)
    return evaluate_global(tree, network, subset, config.grid,
                           label_model=label_model)
