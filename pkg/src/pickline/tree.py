"""Binary decision tree over continuous process features, split by gain ratio.

The tree classifies coil and bath parameters into the admissible speed
classes A/B/C plus class U (defective at any speed). Splits follow the
classic normalized-information-gain recipe: at each node the candidate
(feature, threshold) with the highest gain ratio is chosen, where thresholds
sit at midpoints between consecutive distinct feature values and the gain is
divided by the split information. An optional pessimistic-pruning pass
collapses subtrees whose estimated error is no better than a leaf.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from statistics import NormalDist
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidSplitError, ModelFormatError
from .records import DEFECT, CoilRecord, SpeedClass, classify_speed

#: Features the tree may split on. Line speed is the prediction target and
#: is deliberately absent; strip width carries no signal in this model.
TREE_FEATURES = (
    "t_s", "W", "T_1", "T_2", "T_3", "T_rinse",
    "HCl_1", "Fe2_1", "HCl_2", "Fe2_2", "HCl_3", "Fe2_3",
)

CLASS_ORDER = (SpeedClass.A, SpeedClass.B, SpeedClass.C, SpeedClass.U)
_CLASS_INDEX = {c: i for i, c in enumerate(CLASS_ORDER)}

#: Tie break on equal gain ratios beyond this resolution: lower feature
#: index, then lower threshold.
_TIE_EPS = 0.0


def entropy(counts: Sequence[float]) -> float:
    """Shannon entropy in bits of a class-count vector.

    H = -sum_i p_i * log2(p_i) over classes with p_i > 0.
    """
    arr = np.asarray(counts, dtype=float)
    if arr.ndim != 1 or len(arr) == 0:
        raise InvalidInputError("counts must be a non-empty 1-D sequence")
    if np.any(arr < 0):
        raise InvalidInputError("counts must be non-negative")
    total = arr.sum()
    if total <= 0:
        raise InvalidInputError("total count must be positive")
    p = arr[arr > 0] / total
    return float(-(p * np.log2(p)).sum())


def _rows_entropy(counts: np.ndarray) -> np.ndarray:
    """Entropy of each row of a (m, k) count matrix; zero-total rows give 0."""
    totals = counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.maximum(totals, 1e-300), 0.0)
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=1)


def gain_ratio(X: np.ndarray, y: np.ndarray, feature: int, threshold: float) -> float:
    """Normalized information gain of splitting on ``feature <= threshold``.

    gain ratio = (H(parent) - sum_i |S_i|/|S| * H(S_i)) / split_info, with
    split_info the entropy of the partition sizes. Returns 0 when the
    information gain is 0. Raises InvalidSplitError for a degenerate split
    (one side empty) or a threshold outside the open feature range.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    col = X[:, feature]
    if not (col.min() < threshold < col.max()):
        raise InvalidSplitError(
            f"threshold {threshold!r} not strictly inside the range of feature {feature}")
    mask = col <= threshold
    n_left = int(mask.sum())
    n_right = len(y) - n_left
    if n_left == 0 or n_right == 0:
        raise InvalidSplitError("split leaves one side empty")
    n = len(y)
    parent = entropy(np.bincount(y, minlength=len(CLASS_ORDER)))
    h_left = entropy(np.bincount(y[mask], minlength=len(CLASS_ORDER)))
    h_right = entropy(np.bincount(y[~mask], minlength=len(CLASS_ORDER)))
    gain = parent - (n_left / n) * h_left - (n_right / n) * h_right
    if gain <= 0:
        return 0.0
    pl, pr = n_left / n, n_right / n
    split_info = -(pl * math.log2(pl) + pr * math.log2(pr))
    return gain / split_info


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    min_leaf: int = 1,
) -> tuple[int, float] | None:
    """Highest gain-ratio (feature, threshold) pair, or None without positive gain.

    Candidate thresholds are the midpoints between consecutive distinct
    sorted values of each feature. Ties break toward the lower feature
    index, then the lower threshold. ``min_leaf`` discards candidates that
    would leave fewer samples on either side.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    n = len(y)
    if n < 2:
        raise InvalidInputError("need at least two samples to split")
    if len(np.unique(y)) < 2:
        return None
    k = len(CLASS_ORDER)
    parent_counts = np.bincount(y, minlength=k).astype(float)
    parent_h = entropy(parent_counts)
    best: tuple[float, int, float] | None = None  # (ratio, feature, threshold)
    sizes = np.arange(1, n, dtype=float)
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        onehot = np.zeros((n, k))
        onehot[np.arange(n), y[order]] = 1.0
        left_counts = np.cumsum(onehot, axis=0)[:-1]
        right_counts = parent_counts - left_counts
        cut_ok = xs[:-1] < xs[1:]
        if min_leaf > 1:
            cut_ok &= (sizes >= min_leaf) & (n - sizes >= min_leaf)
        if not cut_ok.any():
            continue
        pl = sizes / n
        pr = 1.0 - pl
        gains = parent_h - pl * _rows_entropy(left_counts) - pr * _rows_entropy(right_counts)
        with np.errstate(divide="ignore", invalid="ignore"):
            split_info = -(pl * np.log2(pl) + pr * np.log2(pr))
        ratios = np.where(cut_ok & (gains > 0), gains / split_info, -1.0)
        i = int(np.argmax(ratios))
        if ratios[i] <= 0:
            continue
        threshold = float((xs[i] + xs[i + 1]) / 2)
        if best is None or ratios[i] > best[0] + _TIE_EPS:
            best = (float(ratios[i]), f, threshold)
    if best is None:
        return None
    return best[1], best[2]


@dataclass
class Leaf:
    speed_class: SpeedClass
    histogram: tuple[int, ...]  # counts per CLASS_ORDER


@dataclass
class Internal:
    feature: int
    threshold: float
    left: "Leaf | Internal"
    right: "Leaf | Internal"


TreeNode = Leaf | Internal


@dataclass(frozen=True)
class TreeConfig:
    pruning: bool = True
    confidence: float = 0.25
    min_leaf: int = 2


@dataclass
class DecisionTree:
    """Trained tree plus its training metadata. Immutable once built."""

    root: TreeNode
    feature_names: tuple[str, ...]
    seed: int
    sample_count: int

    @property
    def depth(self) -> int:
        def d(node):
            if isinstance(node, Leaf):
                return 1
            return 1 + max(d(node.left), d(node.right))
        return d(self.root)

    @property
    def size(self) -> int:
        def s(node):
            if isinstance(node, Leaf):
                return 1
            return 1 + s(node.left) + s(node.right)
        return s(self.root)

    def predict(self, features: Mapping[str, float] | Sequence[float]) -> SpeedClass:
        """Classify one feature vector by root-to-leaf traversal.

        Missing or non-finite feature values raise InvalidInputError.
        """
        if isinstance(features, Mapping):
            try:
                vec = [float(features[name]) for name in self.feature_names]
            except KeyError as exc:
                raise InvalidInputError(f"missing feature {exc.args[0]!r}") from exc
        else:
            vec = [float(x) for x in features]
            if len(vec) != len(self.feature_names):
                raise InvalidInputError(
                    f"expected {len(self.feature_names)} features, got {len(vec)}")
        if any(not math.isfinite(x) for x in vec):
            raise InvalidInputError("features must be finite")
        node = self.root
        while isinstance(node, Internal):
            node = node.left if vec[node.feature] <= node.threshold else node.right
        return node.speed_class


def predict_class(tree: DecisionTree,
                  features: Mapping[str, float] | Sequence[float]) -> SpeedClass:
    """Functional alias for DecisionTree.predict."""
    return tree.predict(features)


def features_matrix(records: Sequence[CoilRecord],
                    names: Sequence[str] = TREE_FEATURES) -> np.ndarray:
    return np.array([[r.value(n) for n in names] for r in records], dtype=float)


def _majority(counts: np.ndarray) -> SpeedClass:
    return CLASS_ORDER[int(np.argmax(counts))]


def _grow(X: np.ndarray, y: np.ndarray, cfg: TreeConfig) -> TreeNode:
    counts = np.bincount(y, minlength=len(CLASS_ORDER))
    hist = tuple(int(c) for c in counts)
    if len(np.unique(y)) == 1 or len(y) < 2 * cfg.min_leaf:
        return Leaf(_majority(counts), hist)
    found = best_split(X, y, min_leaf=cfg.min_leaf)
    if found is None:
        return Leaf(_majority(counts), hist)
    feature, threshold = found
    mask = X[:, feature] <= threshold
    left = _grow(X[mask], y[mask], cfg)
    right = _grow(X[~mask], y[~mask], cfg)
    return Internal(feature, threshold, left, right)


def _pessimistic_error(errors: float, n: float, z: float) -> float:
    """Upper confidence bound on the error rate of a leaf with n samples."""
    if n <= 0:
        return 0.0
    f = errors / n
    z2 = z * z
    num = f + z2 / (2 * n) + z * math.sqrt(max(0.0, f / n - f * f / n + z2 / (4 * n * n)))
    return num / (1 + z2 / n)


def _node_histogram(node: TreeNode) -> np.ndarray:
    if isinstance(node, Leaf):
        return np.asarray(node.histogram, dtype=float)
    return _node_histogram(node.left) + _node_histogram(node.right)


def _prune(node: TreeNode, z: float) -> tuple[TreeNode, float]:
    """Bottom-up subtree replacement; returns (node, estimated error count)."""
    hist = _node_histogram(node)
    n = hist.sum()
    leaf_errors = n - hist.max()
    leaf_estimate = n * _pessimistic_error(leaf_errors, n, z)
    if isinstance(node, Leaf):
        return node, leaf_estimate
    left, left_est = _prune(node.left, z)
    right, right_est = _prune(node.right, z)
    subtree_estimate = left_est + right_est
    if leaf_estimate <= subtree_estimate + 1e-9:
        return Leaf(_majority(hist), tuple(int(c) for c in hist)), leaf_estimate
    return Internal(node.feature, node.threshold, left, right), subtree_estimate


def train_tree(
    X: np.ndarray,
    labels: Sequence[SpeedClass],
    config: TreeConfig = TreeConfig(),
    feature_names: Sequence[str] = TREE_FEATURES,
    seed: int = 0,
) -> DecisionTree:
    """Grow (and optionally prune) a tree on labeled feature vectors.

    Growth recurses until a node is pure, falls under the min-leaf floor, or
    no candidate split has positive gain. Deterministic: identical inputs
    and config produce an identical serialized tree.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise InvalidInputError("training set must be a non-empty 2-D matrix")
    if len(labels) != len(X):
        raise InvalidInputError("one label per sample required")
    if X.shape[1] != len(feature_names):
        raise InvalidInputError("feature count does not match feature names")
    y = np.array([_CLASS_INDEX[SpeedClass(c)] for c in labels], dtype=int)
    root = _grow(X, y, config)
    if config.pruning:
        z = NormalDist().inv_cdf(1.0 - config.confidence)
        root, _ = _prune(root, z)
    return DecisionTree(root=root, feature_names=tuple(feature_names),
                        seed=seed, sample_count=len(y))


# ---------------------------------------------------------------------------
# Four-class labeling rule
# ---------------------------------------------------------------------------

def label_records(records: Sequence[CoilRecord], model, grid) -> list[SpeedClass | None]:
    """Assign each record its speed class for tree training and evaluation.

    A record is class U when ``model`` (the defect network, or the noise-free
    kinetics oracle in tests) predicts a defect at every grid speed.
    Otherwise non-defective records take classify_speed(v), and defective
    records get None: their admissible class is unknown, so they are
    excluded from tree training.
    """
    from .advisor import bath_inputs  # local import avoids a module cycle

    vs = grid.points()
    n_v = len(vs)
    rows = np.empty((len(records) * n_v, 8), dtype=float)
    for i, rec in enumerate(records):
        bath = bath_inputs(rec)
        rows[i * n_v:(i + 1) * n_v, :7] = bath
        rows[i * n_v:(i + 1) * n_v, 7] = vs
    predicted = model.predict_batch(rows)
    out: list[SpeedClass | None] = []
    for i, rec in enumerate(records):
        segment = predicted[i * n_v:(i + 1) * n_v]
        if all(p == DEFECT for p in segment):
            out.append(SpeedClass.U)
        elif not rec.under_p:
            out.append(classify_speed(rec.v))
        else:
            out.append(None)
    return out


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def _histogram_text(hist: Sequence[int]) -> str:
    return ",".join(f"{c.value}:{int(n)}" for c, n in zip(CLASS_ORDER, hist))


def _parse_histogram(text: str) -> tuple[int, ...]:
    counts = {}
    for part in text.split(","):
        name, _, num = part.partition(":")
        counts[name] = int(num)
    try:
        return tuple(counts[c.value] for c in CLASS_ORDER)
    except KeyError as exc:
        raise ModelFormatError(f"histogram missing class {exc.args[0]!r}") from exc


def serialize_tree(tree: DecisionTree) -> str:
    """Render a tree in the line-oriented text format.

    ``D`` carries depth/size/seed/sample-count, ``F`` the feature names,
    then one node per line: ``N <id> <feature> <threshold> <left> <right>``
    for internal nodes and ``L <id> <class> <histogram>`` for leaves. Node
    ids are assigned in preorder, so output is stable across runs.
    """
    lines = [
        f"D {tree.depth} {tree.size} {tree.seed} {tree.sample_count}",
        "F " + " ".join(tree.feature_names),
    ]
    counter = 0

    def walk(node) -> int:
        nonlocal counter
        node_id = counter
        counter += 1
        if isinstance(node, Leaf):
            lines.append(f"L {node_id} {node.speed_class.value} {_histogram_text(node.histogram)}")
            return node_id
        slot = len(lines)
        lines.append("")
        left_id = walk(node.left)
        right_id = walk(node.right)
        name = tree.feature_names[node.feature]
        lines[slot] = f"N {node_id} {name} {node.threshold!r} {left_id} {right_id}"
        return node_id

    walk(tree.root)
    return "\n".join(lines) + "\n"


def deserialize_tree(text: str) -> DecisionTree:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if len(lines) < 3 or not lines[0].startswith("D ") or not lines[1].startswith("F "):
        raise ModelFormatError("tree file must start with D and F header lines")
    try:
        _, depth_s, size_s, seed_s, samples_s = lines[0].split()
        feature_names = tuple(lines[1].split()[1:])
        nodes: dict[int, tuple] = {}
        for ln in lines[2:]:
            parts = ln.split()
            if parts[0] == "N":
                _, node_id, name, threshold, left_id, right_id = parts
                nodes[int(node_id)] = ("N", feature_names.index(name),
                                       float(threshold), int(left_id), int(right_id))
            elif parts[0] == "L":
                _, node_id, cls, hist = parts
                nodes[int(node_id)] = ("L", SpeedClass(cls), _parse_histogram(hist))
            else:
                raise ModelFormatError(f"unknown node line {ln!r}")
    except (ValueError, IndexError) as exc:
        raise ModelFormatError(f"malformed tree file: {exc}") from exc

    def build(node_id: int) -> TreeNode:
        entry = nodes.get(node_id)
        if entry is None:
            raise ModelFormatError(f"node {node_id} referenced but not defined")
        if entry[0] == "L":
            return Leaf(entry[1], entry[2])
        return Internal(entry[1], entry[2], build(entry[3]), build(entry[4]))

    tree = DecisionTree(root=build(0), feature_names=feature_names,
                        seed=int(seed_s), sample_count=int(samples_s))
    if tree.depth != int(depth_s) or tree.size != int(size_s):
        raise ModelFormatError("tree header depth/size disagree with the node list")
    return tree


def save_tree(tree: DecisionTree, path: str | Path) -> None:
    Path(path).write_text(serialize_tree(tree), encoding="ascii", newline="\n")


def load_tree(path: str | Path) -> DecisionTree:
    return deserialize_tree(Path(path).read_text(encoding="ascii"))
