"""From-scratch binary logistic regression, a CART tree, splitting and metrics.

Everything here is deterministic: the same data order, seed and config give
bitwise-identical models.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from . import SCHEMA_VERSION
from ._io import read_json, write_json
from .errors import (
    DegenerateData,
    DimensionMismatch,
    EmptyInput,
    LengthMismatch,
    SchemaError,
    TooFewSamples,
)


@dataclass
class Dataset:
    X: np.ndarray | sp.csr_matrix
    y: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self):
        if not sp.issparse(self.X):
            self.X = np.asarray(self.X, dtype=float)
            if self.X.ndim == 1:
                self.X = self.X.reshape(-1, 1)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.shape[0] != self.y.shape[0]:
            raise LengthMismatch(f"{self.X.shape[0]} rows but {self.y.shape[0]} labels")
        data = self.X.data if sp.issparse(self.X) else self.X
        if not np.all(np.isfinite(data)):
            raise ValueError("dataset contains NaN or infinite values")
        if not self.feature_names:
            self.feature_names = [f"x{j}" for j in range(self.X.shape[1])]
        if len(self.feature_names) != self.X.shape[1]:
            raise DimensionMismatch("feature_names length does not match columns")

    def __len__(self) -> int:
        return self.X.shape[0]

    def subset(self, idx: Sequence[int]) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.y[idx], list(self.feature_names))


def train_test_split(ds: Dataset, train_fraction: float = 0.7, seed: int = 0):
    """Seeded stratified split; the train side gets floor(fraction * n) samples.

    Per-class train quotas are floors of ``fraction * n_class``; leftover
    slots go to the classes with the largest remainders (lowest class first
    on ties).
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must be in (0, 1)")
    n = len(ds)
    frac = Fraction(train_fraction).limit_denominator(10**9)
    n_train = math.floor(frac * n)
    if n_train == 0 or n_train == n:
        raise TooFewSamples(f"a {float(frac)} split of {n} samples leaves one side empty")

    classes, counts = np.unique(ds.y, return_counts=True)
    exact = {int(c): frac * int(k) for c, k in zip(classes, counts)}
    quota = {c: math.floor(q) for c, q in exact.items()}
    spare = n_train - sum(quota.values())
    for c in sorted(exact, key=lambda c: (-(exact[c] - quota[c]), c))[:spare]:
        quota[c] += 1

    order = list(range(n))
    random.Random(seed).shuffle(order)
    train, test = [], []
    for i in order:
        c = int(ds.y[i])
        if quota[c] > 0:
            quota[c] -= 1
            train.append(i)
        else:
            test.append(i)
    return ds.subset(train), ds.subset(test)


# ------------------------------------------------------------ logistic regression

@dataclass(frozen=True)
class LogRegConfig:
    learning_rate: float = 0.1
    epochs: int = 1000
    l2: float = 1e-4
    scale: bool = True  # min-max scaling fitted on the training split


@dataclass
class LogRegModel:
    weights: np.ndarray
    intercept: float
    feature_names: list[str]
    scale_min: np.ndarray | None = None
    scale_max: np.ndarray | None = None
    grad_norm: float = float("nan")

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.feature_names) != self.weights.shape[0]:
            raise DimensionMismatch("weights length does not match feature_names")

    @classmethod
    def zeros(cls, feature_names: list[str]) -> "LogRegModel":
        return cls(np.zeros(len(feature_names)), 0.0, list(feature_names))

    def scale(self, X):
        if self.scale_min is None:
            return X
        span = self.scale_max - self.scale_min
        span = np.where(span > 0, span, 1.0)
        return (np.asarray(X, dtype=float) - self.scale_min) / span

    def decision_function(self, X) -> np.ndarray:
        X = X if sp.issparse(X) else np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.weights.shape[0]:
            raise DimensionMismatch(f"expected {self.weights.shape[0]} features, got {X.shape[1]}")
        return np.asarray(self.scale(X) @ self.weights).ravel() + self.intercept

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision_function(X))

    def predict(self, X) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": "logreg",
            "schema_version": SCHEMA_VERSION,
            "feature_names": list(self.feature_names),
            "weights": [float(v) for v in self.weights],
            "intercept": float(self.intercept),
            "scaler": None if self.scale_min is None else {
                "min": [float(v) for v in self.scale_min],
                "max": [float(v) for v in self.scale_max],
            },
            "grad_norm": float(self.grad_norm),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "LogRegModel":
        _check_schema(obj, "logreg")
        scaler = obj.get("scaler")
        return cls(
            np.asarray(obj["weights"], dtype=float),
            float(obj["intercept"]),
            list(obj["feature_names"]),
            None if scaler is None else np.asarray(scaler["min"], dtype=float),
            None if scaler is None else np.asarray(scaler["max"], dtype=float),
            float(obj.get("grad_norm", float("nan"))),
        )


def predict_proba(model: LogRegModel, x) -> float:
    """Probability of the positive class for one feature vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != model.weights.shape[0]:
        raise DimensionMismatch(f"expected {model.weights.shape[0]} features")
    return float(model.predict_proba(x[None, :])[0])


def logistic_loss_grad(weights, intercept, X, y, l2: float = 0.0):
    """Mean log-loss plus ``l2/2 * |w|^2`` and its gradient (intercept unpenalised)."""
    z = np.asarray(X @ weights).ravel() + intercept
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(weights, weights))
    r = (expit(z) - y) / n
    grad_w = np.asarray(X.T @ r).ravel() + l2 * weights
    grad_b = float(np.sum(r))
    return loss, grad_w, grad_b


def train_logreg(train: Dataset, config: LogRegConfig = LogRegConfig()) -> LogRegModel:
    """Full-batch gradient descent on the L2-regularised logistic loss."""
    y = train.y
    if len(y) == 0 or not (np.any(y == 1) and np.any(y == 0)):
        raise DegenerateData("logistic regression needs both classes present")
    if np.any((y != 0) & (y != 1)):
        raise DegenerateData("labels must be 0/1")
    model = LogRegModel.zeros(train.feature_names)
    X = train.X
    if config.scale:
        if sp.issparse(X):
            X = X.toarray()
        model.scale_min = X.min(axis=0)
        model.scale_max = X.max(axis=0)
        X = model.scale(X)
    w = np.zeros(X.shape[1])
    b = 0.0
    lr, l2 = config.learning_rate, config.l2
    gw, gb = np.zeros_like(w), 0.0
    for _ in range(config.epochs):
        _, gw, gb = logistic_loss_grad(w, b, X, y, l2)
        w = w - lr * gw
        b = b - lr * gb
    _, gw, gb = logistic_loss_grad(w, b, X, y, l2)
    model.weights = w
    model.intercept = float(b)
    model.grad_norm = float(math.sqrt(float(np.dot(gw, gw)) + gb * gb))
    return model


# ------------------------------------------------------------ decision tree

@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None  # None = unlimited
    min_leaf: int = 1


@dataclass
class TreeModel:
    """Binary CART tree stored as a flat node list; node 0 is the root.

    Internal nodes route ``x[feature] <= threshold`` to ``left``.
    """

    nodes: list[dict]
    n_classes: int
    feature_names: list[str]
    max_depth: int | None = None

    def _leaf(self, x) -> dict:
        node = self.nodes[0]
        while "label" not in node:
            node = self.nodes[node["left"] if x[node["feature"]] <= node["threshold"] else node["right"]]
        return node

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != len(self.feature_names):
            raise DimensionMismatch(f"expected {len(self.feature_names)} features, got {X.shape[1]}")
        return np.array([self._leaf(row)["label"] for row in X], dtype=np.int64)

    def depth(self) -> int:
        def walk(i):
            n = self.nodes[i]
            return 0 if "label" in n else 1 + max(walk(n["left"]), walk(n["right"]))
        return walk(0)

    def to_dict(self) -> dict:
        return {
            "kind": "tree",
            "schema_version": SCHEMA_VERSION,
            "feature_names": list(self.feature_names),
            "n_classes": self.n_classes,
            "max_depth": self.max_depth,
            "nodes": self.nodes,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "TreeModel":
        _check_schema(obj, "tree")
        return cls(list(obj["nodes"]), int(obj["n_classes"]), list(obj["feature_names"]),
                   obj.get("max_depth"))


_TIE = 1e-12


def _best_split(X, y1h, min_leaf):
    """Return (feature, threshold, left_mask) maximising sum(L^2)/nL + sum(R^2)/nR."""
    n = X.shape[0]
    best = None
    best_score = -math.inf
    for f in range(X.shape[1]):
        order = np.argsort(X[:, f], kind="stable")
        v = X[order, f]
        cum = np.cumsum(y1h[order], axis=0)
        total = cum[-1]
        pos = np.nonzero(v[:-1] != v[1:])[0]
        nl = pos + 1
        ok = (nl >= min_leaf) & (n - nl >= min_leaf)
        pos, nl = pos[ok], nl[ok]
        if pos.size == 0:
            continue
        left = cum[pos]
        right = total - left
        score = (left ** 2).sum(1) / nl + (right ** 2).sum(1) / (n - nl)
        top = score.max()
        k = int(np.nonzero(score >= top - _TIE * max(1.0, abs(top)))[0][0])
        if best is None or score[k] > best_score + _TIE * max(1.0, abs(best_score)):
            best_score = float(score[k])
            i = pos[k]
            best = (f, float((v[i] + v[i + 1]) / 2.0))
    return best


def train_tree(train: Dataset, config: TreeConfig = TreeConfig(), n_classes: int | None = None) -> TreeModel:
    """CART with Gini impurity and exhaustive midpoint thresholds.

    Split ties go to the lowest feature index, then the lowest threshold; a
    leaf predicts its majority class, lowest class id on ties. Zero-gain
    splits are taken while a node is impure so XOR-like data still separates.
    """
    if len(train) == 0:
        raise EmptyInput("cannot fit a tree on zero samples")
    X = train.X.toarray() if sp.issparse(train.X) else train.X
    y = train.y
    k = int(n_classes if n_classes is not None else y.max() + 1)
    y1h = np.eye(k)[y]
    nodes: list[dict] = []

    def build(idx: np.ndarray, depth: int) -> int:
        counts = y1h[idx].sum(0)
        me = len(nodes)
        nodes.append({})
        leaf = {"label": int(np.argmax(counts)), "counts": [int(c) for c in counts]}
        if (np.count_nonzero(counts) <= 1
                or (config.max_depth is not None and depth >= config.max_depth)
                or len(idx) < 2 * config.min_leaf):
            nodes[me] = leaf
            return me
        split = _best_split(X[idx], y1h[idx], config.min_leaf)
        if split is None:
            nodes[me] = leaf
            return me
        f, thr = split
        go_left = X[idx, f] <= thr
        left = build(idx[go_left], depth + 1)
        right = build(idx[~go_left], depth + 1)
        nodes[me] = {"feature": f, "threshold": thr, "left": left, "right": right}
        return me

    build(np.arange(len(train)), 0)
    return TreeModel(nodes, k, list(train.feature_names), config.max_depth)


# ------------------------------------------------------------ metrics

@dataclass(frozen=True)
class Metrics:
    labels: list
    confusion: list[list[int]]  # rows: truth, cols: prediction
    precision: dict
    recall: dict
    f1: dict
    support: dict
    accuracy: float

    @property
    def macro_precision(self) -> float:
        return float(np.mean(list(self.precision.values())))

    @property
    def macro_recall(self) -> float:
        return float(np.mean(list(self.recall.values())))

    @property
    def macro_f1(self) -> float:
        return float(np.mean(list(self.f1.values())))

    def to_dict(self) -> dict:
        key = str
        return {
            "labels": [key(l) for l in self.labels],
            "confusion": self.confusion,
            "precision": {key(k): v for k, v in self.precision.items()},
            "recall": {key(k): v for k, v in self.recall.items()},
            "f1": {key(k): v for k, v in self.f1.items()},
            "support": {key(k): v for k, v in self.support.items()},
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
        }


def metrics_from_confusion(labels: list, confusion: Sequence[Sequence[int]]) -> Metrics:
    cm = np.asarray(confusion, dtype=np.int64)
    precision, recall, f1, support = {}, {}, {}, {}
    for i, lab in enumerate(labels):
        tp = int(cm[i, i])
        pred_pos = int(cm[:, i].sum())
        true_pos = int(cm[i, :].sum())
        p = tp / pred_pos if pred_pos else 0.0
        r = tp / true_pos if true_pos else 0.0
        precision[lab] = p
        recall[lab] = r
        f1[lab] = 2 * p * r / (p + r) if (p + r) else 0.0
        support[lab] = true_pos
    total = int(cm.sum())
    acc = int(np.trace(cm)) / total if total else 0.0
    return Metrics(list(labels), cm.tolist(), precision, recall, f1, support, acc)


def evaluate(pred: Sequence, truth: Sequence, labels: Sequence | None = None) -> Metrics:
    """Per-class precision/recall/F1 and accuracy. Undefined ratios are 0."""
    pred, truth = list(pred), list(truth)
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions for {len(truth)} labels")
    if not pred:
        raise EmptyInput("nothing to evaluate")
    labels = sorted(set(truth) | set(pred)) if labels is None else list(labels)
    pos = {lab: i for i, lab in enumerate(labels)}
    cm = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for p, t in zip(pred, truth):
        cm[pos[t], pos[p]] += 1
    return metrics_from_confusion(labels, cm)


# ------------------------------------------------------------ persistence

def _check_schema(obj: dict, kind: str) -> None:
    if obj.get("kind") != kind:
        raise SchemaError(f"expected a {kind} model, found {obj.get('kind')!r}")
    if obj.get("schema_version") != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {obj.get('schema_version')!r}")


def save_model(model: LogRegModel | TreeModel, path) -> None:
    write_json(path, model.to_dict())


def load_model(path) -> LogRegModel | TreeModel:
    obj = read_json(path)
    kind = obj.get("kind")
    if kind == "logreg":
        return LogRegModel.from_dict(obj)
    if kind == "tree":
        return TreeModel.from_dict(obj)
    raise SchemaError(f"unknown model kind {kind!r}")
