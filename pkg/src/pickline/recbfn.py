"""Rectangular basis function network for the under-pickling defect classifier.

Each hidden unit covers a hyper-rectangle of the scaled input space with a
trapezoidal activation: full membership inside a core box, a linear ramp out
to a support box, zero beyond. Dimensions combine by minimum (fuzzy AND).
Training is constructive dynamic decay adjustment: patterns either reinforce
an existing unit of their class (cover), introduce a new unit (commit), or
force conflicting units of the other class to shrink their support until
their activation at the pattern drops below the negative threshold.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    InvalidInputError,
    ModelFormatError,
    NotFittedError,
)
from .records import DEFECT, NO_DEFECT, CoilRecord

#: Network inputs: the bath state observable at advisory time, plus line
#: speed v as a free input so the advisor can sweep it.
NETWORK_FEATURES = ("T_3", "HCl_1", "Fe2_1", "HCl_2", "Fe2_2", "HCl_3", "Fe2_3", "v")

#: Scaled values outside the training range clamp to this box; committed
#: units start with their support spanning it.
CLAMP_LO = -0.25
CLAMP_HI = 1.25

THETA_PLUS = 0.4
THETA_MINUS = 0.2
EPOCH_CAP = 20

_LABELS = (NO_DEFECT, DEFECT)
_LABEL_INDEX = {NO_DEFECT: 0, DEFECT: 1}


class InputScaler:
    """Per-dimension min-max scaler mapping the training range onto [0, 1]."""

    def __init__(self, feature_names: Sequence[str] = NETWORK_FEATURES):
        self.feature_names = tuple(feature_names)
        self.mins: np.ndarray | None = None
        self.maxs: np.ndarray | None = None

    @property
    def fitted(self) -> bool:
        return self.mins is not None

    def fit(self, X: np.ndarray) -> "InputScaler":
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.feature_names):
            raise InvalidInputError(
                f"expected a 2-D matrix with {len(self.feature_names)} columns")
        mins = X.min(axis=0)
        maxs = X.max(axis=0)
        flat = maxs <= mins
        if flat.any():
            name = self.feature_names[int(np.argmax(flat))]
            raise InvalidInputError(
                f"feature {name!r} is constant over the training data; max must exceed min")
        self.mins, self.maxs = mins, maxs
        return self

    def transform(self, X: np.ndarray) -> np.ndarray:
        """Scale raw rows; out-of-range values clamp to [-0.25, 1.25]."""
        if not self.fitted:
            raise NotFittedError("scaler has not been fitted")
        X = np.asarray(X, dtype=float)
        scaled = (X - self.mins) / (self.maxs - self.mins)
        return np.clip(scaled, CLAMP_LO, CLAMP_HI)

    def transform_one(self, x: Sequence[float]) -> np.ndarray:
        return self.transform(np.asarray(x, dtype=float)[None, :])[0]


def normalize(x: Sequence[float], scaler: InputScaler) -> np.ndarray:
    """Scale one raw input vector. Functional alias for transform_one."""
    return scaler.transform_one(x)


@dataclass(frozen=True)
class RecBFUnit:
    """One rectangular unit: nested core/support boxes, class label, weight."""

    s_lo: tuple[float, ...]
    c_lo: tuple[float, ...]
    c_hi: tuple[float, ...]
    s_hi: tuple[float, ...]
    label: str
    weight: int


def membership(unit: RecBFUnit, x_scaled: Sequence[float]) -> float:
    """Trapezoidal activation of one unit at a scaled point, min over dims."""
    x = np.asarray(x_scaled, dtype=float)
    return float(_membership_matrix(
        x[None, :],
        np.asarray(unit.s_lo)[None, :], np.asarray(unit.c_lo)[None, :],
        np.asarray(unit.c_hi)[None, :], np.asarray(unit.s_hi)[None, :])[0, 0])


def _membership_matrix(X: np.ndarray, s_lo: np.ndarray, c_lo: np.ndarray,
                       c_hi: np.ndarray, s_hi: np.ndarray) -> np.ndarray:
    """Activation of every unit at every row: (n, d) x (u, d) -> (n, u).

    Dimensions are folded one at a time (min accumulation) to keep peak
    memory at one (n, u) panel. Zero-width ramps degrade to a step:
    membership 1 from the core edge on.
    """
    n = X.shape[0]
    mu = np.ones((n, s_lo.shape[0]))
    for d in range(X.shape[1]):
        x = X[:, d:d + 1]
        lw = c_lo[:, d] - s_lo[:, d]
        rw = s_hi[:, d] - c_hi[:, d]
        left = np.where(lw > 0, (x - s_lo[:, d]) / np.where(lw > 0, lw, 1.0),
                        (x >= c_lo[:, d]).astype(float))
        right = np.where(rw > 0, (s_hi[:, d] - x) / np.where(rw > 0, rw, 1.0),
                         (x <= c_hi[:, d]).astype(float))
        np.minimum(mu, np.clip(left, 0.0, 1.0), out=mu)
        np.minimum(mu, np.clip(right, 0.0, 1.0), out=mu)
    return mu


@dataclass
class RecBFNetwork:
    """Trained network: stacked unit boxes plus the input scaler.

    Immutable by convention after training; prediction is pure.
    """

    feature_names: tuple[str, ...]
    s_lo: np.ndarray  # (units, dims)
    c_lo: np.ndarray
    c_hi: np.ndarray
    s_hi: np.ndarray
    labels: np.ndarray  # (units,) indexes into _LABELS
    weights: np.ndarray  # (units,) covered-pattern counts
    scaler: InputScaler | None
    theta_plus: float = THETA_PLUS
    theta_minus: float = THETA_MINUS
    converged: bool = True
    epochs: int = 0
    residual_conflicts: int = 0

    @property
    def unit_count(self) -> int:
        return len(self.labels)

    def units(self) -> list[RecBFUnit]:
        return [
            RecBFUnit(tuple(self.s_lo[i]), tuple(self.c_lo[i]),
                      tuple(self.c_hi[i]), tuple(self.s_hi[i]),
                      _LABELS[self.labels[i]], int(self.weights[i]))
            for i in range(self.unit_count)
        ]

    def class_scores_scaled(self, X_scaled: np.ndarray) -> np.ndarray:
        """Weighted-sum activation per class: (n, d) -> (n, 2) in _LABELS order."""
        X = np.asarray(X_scaled, dtype=float)
        scores = np.zeros((len(X), len(_LABELS)))
        # Row blocks bound peak memory to block x units.
        block = max(1, 2_000_000 // max(1, self.unit_count))
        for start in range(0, len(X), block):
            stop = min(len(X), start + block)
            mu = _membership_matrix(X[start:stop], self.s_lo, self.c_lo,
                                    self.c_hi, self.s_hi)
            weighted = mu * self.weights
            for k in range(len(_LABELS)):
                mask = self.labels == k
                if mask.any():
                    scores[start:stop, k] = weighted[:, mask].sum(axis=1)
        return scores

    def predict_scaled_batch(self, X_scaled: np.ndarray) -> list[str]:
        scores = self.class_scores_scaled(X_scaled)
        # Ties and all-zero activations resolve to the defect class: a false
        # alarm is cheaper than a missed under-pickling.
        defect = scores[:, _LABEL_INDEX[DEFECT]] >= scores[:, _LABEL_INDEX[NO_DEFECT]]
        return [DEFECT if d else NO_DEFECT for d in defect]

    def predict_batch(self, X_raw: np.ndarray) -> list[str]:
        if self.scaler is None:
            raise NotFittedError("network has no input scaler; raw prediction unavailable")
        return self.predict_scaled_batch(self.scaler.transform(np.asarray(X_raw, dtype=float)))

    def predict(self, x_raw: Sequence[float]) -> tuple[str, dict[str, float]]:
        """Classify one raw input; returns (class, per-class confidence)."""
        if self.scaler is None:
            raise NotFittedError("network has no input scaler; raw prediction unavailable")
        x = np.asarray(x_raw, dtype=float)
        if x.shape != (len(self.feature_names),):
            raise InvalidInputError(
                f"expected {len(self.feature_names)} inputs, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("inputs must be finite")
        scores = self.class_scores_scaled(self.scaler.transform(x[None, :]))[0]
        label = DEFECT if scores[_LABEL_INDEX[DEFECT]] >= scores[_LABEL_INDEX[NO_DEFECT]] \
            else NO_DEFECT
        return label, {lbl: float(scores[i]) for i, lbl in enumerate(_LABELS)}

    @classmethod
    def from_units(cls, units: Sequence[RecBFUnit], scaler: InputScaler | None,
                   feature_names: Sequence[str] = NETWORK_FEATURES,
                   theta_plus: float = THETA_PLUS,
                   theta_minus: float = THETA_MINUS) -> "RecBFNetwork":
        """Assemble a network from explicit units (used by tests and loading)."""
        d = len(feature_names)
        n = len(units)
        arrays = {name: np.zeros((n, d)) for name in ("s_lo", "c_lo", "c_hi", "s_hi")}
        labels = np.zeros(n, dtype=int)
        weights = np.zeros(n, dtype=int)
        for i, u in enumerate(units):
            for name in arrays:
                row = np.asarray(getattr(u, name), dtype=float)
                if row.shape != (d,):
                    raise InvalidInputError(f"unit {i} has wrong dimensionality")
                arrays[name][i] = row
            if not np.all((arrays["s_lo"][i] <= arrays["c_lo"][i])
                          & (arrays["c_lo"][i] <= arrays["c_hi"][i])
                          & (arrays["c_hi"][i] <= arrays["s_hi"][i])):
                raise InvalidInputError(f"unit {i} violates s_lo <= c_lo <= c_hi <= s_hi")
            if u.weight < 1:
                raise InvalidInputError(f"unit {i} weight must be >= 1")
            labels[i] = _LABEL_INDEX[u.label]
            weights[i] = u.weight
        return cls(feature_names=tuple(feature_names), labels=labels, weights=weights,
                   scaler=scaler, theta_plus=theta_plus, theta_minus=theta_minus,
                   **arrays)


# ---------------------------------------------------------------------------
# Training: dynamic decay adjustment
# ---------------------------------------------------------------------------

class _GrowableUnits:
    """Mutable unit store for the training loop; amortized append."""

    def __init__(self, dims: int):
        cap = 16
        self.dims = dims
        self.count = 0
        self.s_lo = np.empty((cap, dims))
        self.c_lo = np.empty((cap, dims))
        self.c_hi = np.empty((cap, dims))
        self.s_hi = np.empty((cap, dims))
        self.labels = np.empty(cap, dtype=int)
        self.weights = np.empty(cap, dtype=int)

    def _ensure(self) -> None:
        if self.count == len(self.labels):
            for name in ("s_lo", "c_lo", "c_hi", "s_hi"):
                arr = getattr(self, name)
                setattr(self, name, np.concatenate([arr, np.empty_like(arr)]))
            self.labels = np.concatenate([self.labels, np.empty_like(self.labels)])
            self.weights = np.concatenate([self.weights, np.empty_like(self.weights)])

    def commit(self, p: np.ndarray, label: int) -> int:
        self._ensure()
        i = self.count
        self.s_lo[i] = CLAMP_LO
        self.s_hi[i] = CLAMP_HI
        self.c_lo[i] = p
        self.c_hi[i] = p
        self.labels[i] = label
        self.weights[i] = 1
        self.count += 1
        return i

    def memberships(self, p: np.ndarray) -> np.ndarray:
        u = self.count
        return _membership_matrix(p[None, :], self.s_lo[:u], self.c_lo[:u],
                                  self.c_hi[:u], self.s_hi[:u])[0]

    def membership_one(self, i: int, p: np.ndarray) -> float:
        return float(_membership_matrix(
            p[None, :], self.s_lo[i:i + 1], self.c_lo[i:i + 1],
            self.c_hi[i:i + 1], self.s_hi[i:i + 1])[0, 0])

    def extend_core(self, i: int, p: np.ndarray) -> bool:
        changed = False
        if (p < self.c_lo[i]).any():
            self.c_lo[i] = np.minimum(self.c_lo[i], p)
            changed = True
        if (p > self.c_hi[i]).any():
            self.c_hi[i] = np.maximum(self.c_hi[i], p)
            changed = True
        return changed

    def shrink(self, i: int, q: np.ndarray, theta_minus: float) -> bool:
        """Cut unit i's support along the cheapest single dimension so its
        activation at q falls strictly below theta_minus. Cores never shrink;
        a pattern inside the core on every dimension cannot be separated and
        is left as a residual conflict.
        """
        t = theta_minus * (1.0 - 1e-9)
        best_ratio = -1.0
        best: tuple[int, int, float] | None = None  # (dim, side, new edge)
        for d in range(self.dims):
            qd = q[d]
            width = self.s_hi[i, d] - self.s_lo[i, d]
            if qd > self.c_hi[i, d]:
                edge = (qd - t * self.c_hi[i, d]) / (1.0 - t)
                kept = (edge - self.s_lo[i, d]) / width
                side = 1
            elif qd < self.c_lo[i, d]:
                edge = (qd - t * self.c_lo[i, d]) / (1.0 - t)
                kept = (self.s_hi[i, d] - edge) / width
                side = -1
            else:
                continue
            if kept > best_ratio:
                best_ratio = kept
                best = (d, side, edge)
        if best is None:
            return False
        d, side, edge = best
        if side > 0:
            if edge >= self.s_hi[i, d]:
                return False
            self.s_hi[i, d] = edge
        else:
            if edge <= self.s_lo[i, d]:
                return False
            self.s_lo[i, d] = edge
        return True


def train_recbfn(
    X_scaled: np.ndarray,
    labels: Sequence[str],
    theta_plus: float = THETA_PLUS,
    theta_minus: float = THETA_MINUS,
    max_epochs: int = EPOCH_CAP,
    scaler: InputScaler | None = None,
    feature_names: Sequence[str] = NETWORK_FEATURES,
) -> RecBFNetwork:
    """Train on scaled pattern rows with binary defect labels.

    Per epoch, unit weights reset and every pattern in dataset order either
    covers a sufficiently activated same-class unit (weight +1, core extended
    to the pattern) or commits a new point-core unit spanning the clamp box;
    every conflicting unit of the other class then shrinks. Epochs repeat until a
    pass changes nothing or the epoch cap is hit. Non-convergence is not an
    error: the returned network carries converged=False and the number of
    patterns still violating a theta threshold.
    """
    X = np.asarray(X_scaled, dtype=float)
    if X.ndim != 2 or len(X) == 0:
        raise InvalidInputError("training set must be a non-empty 2-D matrix")
    if X.shape[1] != len(feature_names):
        raise InvalidInputError("column count does not match feature names")
    if len(labels) != len(X):
        raise InvalidInputError("one label per pattern required")
    if not (0.0 < theta_minus < theta_plus <= 1.0):
        raise ConfigurationError("thresholds must satisfy 0 < theta- < theta+ <= 1")
    try:
        y = np.array([_LABEL_INDEX[lbl] for lbl in labels], dtype=int)
    except KeyError as exc:
        raise InvalidInputError(f"unknown label {exc.args[0]!r}") from exc
    if len(np.unique(y)) < 2:
        raise InvalidInputError("training data must contain both classes")

    units = _GrowableUnits(X.shape[1])
    n = len(X)
    stable = False
    epochs_run = 0
    for _ in range(max_epochs):
        epochs_run += 1
        units.weights[:units.count] = 0
        changed = False
        for idx in range(n):
            p = X[idx]
            c = y[idx]
            mu = units.memberships(p)
            active_labels = units.labels[:units.count]
            same = np.flatnonzero(active_labels == c)
            covered = False
            if len(same) > 0:
                elig = same[mu[same] >= theta_plus]
                if len(elig) > 0:
                    # Cover the unit whose core stays smallest after absorbing
                    # p; sprawling cores trap later opposite-class patterns
                    # beyond repair because cores never shrink, so oversized
                    # units must starve of weight and be pruned.
                    size = (np.maximum(units.c_hi[elig], p)
                            - np.minimum(units.c_lo[elig], p)).sum(axis=1)
                    j = int(elig[np.lexsort((elig, -mu[elig], size))[0]])
                    units.weights[j] += 1
                    if units.extend_core(j, p):
                        changed = True
                    covered = True
            if not covered:
                new = units.commit(p, c)
                changed = True
                # Resolve conflicts with the other-class patterns already
                # seen this epoch: the fresh clamp-box support overlaps them.
                for prev in range(idx):
                    if y[prev] == c:
                        continue
                    if units.membership_one(new, X[prev]) >= theta_minus:
                        units.shrink(new, X[prev], theta_minus)
            wrong = np.flatnonzero(active_labels != c)
            for k in wrong:
                if mu[k] >= theta_minus:
                    if units.shrink(k, p, theta_minus):
                        changed = True
        if not changed:
            stable = True
            break

    keep = np.flatnonzero(units.weights[:units.count] > 0)
    net = RecBFNetwork(
        feature_names=tuple(feature_names),
        s_lo=units.s_lo[keep].copy(), c_lo=units.c_lo[keep].copy(),
        c_hi=units.c_hi[keep].copy(), s_hi=units.s_hi[keep].copy(),
        labels=units.labels[keep].copy(), weights=units.weights[keep].copy(),
        scaler=scaler, theta_plus=theta_plus, theta_minus=theta_minus,
        epochs=epochs_run)

    mu_all = _membership_matrix(X, net.s_lo, net.c_lo, net.c_hi, net.s_hi)
    conflicts = 0
    for k in range(len(_LABELS)):
        rows = y == k
        own = net.labels == k
        own_max = mu_all[np.ix_(rows, own)].max(axis=1) if own.any() else \
            np.zeros(int(rows.sum()))
        other_max = mu_all[np.ix_(rows, ~own)].max(axis=1) if (~own).any() else \
            np.zeros(int(rows.sum()))
        conflicts += int(((own_max < theta_plus) | (other_max >= theta_minus)).sum())
    net.residual_conflicts = conflicts
    net.converged = stable and conflicts == 0
    return net


def fit_defect_network(
    records: Sequence[CoilRecord],
    theta_plus: float = THETA_PLUS,
    theta_minus: float = THETA_MINUS,
    max_epochs: int = EPOCH_CAP,
) -> RecBFNetwork:
    """Fit the scaler on raw records and train the defect network."""
    X_raw = np.array([[r.value(name) for name in NETWORK_FEATURES] for r in records],
                     dtype=float)
    labels = [DEFECT if r.under_p else NO_DEFECT for r in records]
    scaler = InputScaler(NETWORK_FEATURES).fit(X_raw)
    return train_recbfn(scaler.transform(X_raw), labels, theta_plus=theta_plus,
                        theta_minus=theta_minus, max_epochs=max_epochs, scaler=scaler)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def serialize_network(net: RecBFNetwork) -> str:
    """Line format: H header, F feature names, S scaler ranges, one U line
    per unit carrying class, weight, and per-dimension s_lo c_lo c_hi s_hi.
    """
    if net.scaler is None or not net.scaler.fitted:
        raise NotFittedError("cannot serialize a network without a fitted scaler")
    lines = [
        "H {p!r} {m!r} {conv} {ep} {rc}".format(
            p=float(net.theta_plus), m=float(net.theta_minus),
            conv=int(net.converged), ep=net.epochs, rc=net.residual_conflicts),
        "F " + " ".join(net.feature_names),
        "S " + " ".join(f"{float(lo)!r} {float(hi)!r}" for lo, hi in
                        zip(net.scaler.mins, net.scaler.maxs)),
    ]
    for i in range(net.unit_count):
        coords = " ".join(
            f"{float(net.s_lo[i, d])!r} {float(net.c_lo[i, d])!r} "
            f"{float(net.c_hi[i, d])!r} {float(net.s_hi[i, d])!r}"
            for d in range(len(net.feature_names)))
        lines.append(f"U {_LABELS[net.labels[i]]} {int(net.weights[i])} {coords}")
    return "\n".join(lines) + "\n"


def deserialize_network(text: str) -> RecBFNetwork:
    lines = [ln for ln in text.split("\n") if ln.strip()]
    if len(lines) < 4 or lines[0][:2] != "H " or lines[1][:2] != "F " \
            or lines[2][:2] != "S ":
        raise ModelFormatError("network file must start with H, F and S lines")
    try:
        _, p_s, m_s, conv_s, ep_s, rc_s = lines[0].split()
        feature_names = tuple(lines[1].split()[1:])
        d = len(feature_names)
        scaler_nums = [float(v) for v in lines[2].split()[1:]]
        if len(scaler_nums) != 2 * d:
            raise ModelFormatError("scaler line must carry one (min, max) pair per feature")
        scaler = InputScaler(feature_names)
        scaler.mins = np.array(scaler_nums[0::2])
        scaler.maxs = np.array(scaler_nums[1::2])
        units = []
        for ln in lines[3:]:
            parts = ln.split()
            if parts[0] != "U" or len(parts) != 3 + 4 * d:
                raise ModelFormatError(f"malformed unit line {ln!r}")
            label = parts[1]
            if label not in _LABEL_INDEX:
                raise ModelFormatError(f"unknown unit class {label!r}")
            nums = [float(v) for v in parts[3:]]
            units.append(RecBFUnit(
                s_lo=tuple(nums[0::4]), c_lo=tuple(nums[1::4]),
                c_hi=tuple(nums[2::4]), s_hi=tuple(nums[3::4]),
                label=label, weight=int(parts[2])))
    except ModelFormatError:
        raise
    except (ValueError, IndexError) as exc:
        raise ModelFormatError(f"malformed network file: {exc}") from exc
    net = RecBFNetwork.from_units(units, scaler, feature_names,
                                  theta_plus=float(p_s), theta_minus=float(m_s))
    net.converged = bool(int(conv_s))
    net.epochs = int(ep_s)
    net.residual_conflicts = int(rc_s)
    return net


def save_network(net: RecBFNetwork, path: str | Path) -> None:
    Path(path).write_text(serialize_network(net), encoding="ascii", newline="\n")


def load_network(path: str | Path) -> RecBFNetwork:
    return deserialize_network(Path(path).read_text(encoding="ascii"))
