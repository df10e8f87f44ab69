"""Self-contained classifier zoo used for defenders and surrogates.

Five model kinds: linear SVM (primal subgradient descent on the hinge loss),
k-nearest neighbors, a Gini-impurity decision tree, a random forest of such
trees, and an RBF-kernel SVM (kernelized subgradient descent).  Training is
deterministic given (spec, data): every random choice comes from a generator
seeded with ``spec.train_seed``.

Decisions at the boundary resolve to malicious: a zero SVM margin, a tied
vote, or a tied leaf all predict class 1.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import Dataset
from .rng import Rng

KINDS = ("linear_svm", "knn", "decision_tree", "random_forest", "rbf_svm")


@dataclass(frozen=True)
class ModelSpec:
    """Model kind plus hyperparameters; unused fields are ignored per kind.

    c           regularization constant for linear_svm / rbf_svm; the hinge
                objective uses lambda = 1 / (c * n), so larger c regularizes
                less.
    k           neighbor count for knn.
    gamma       RBF kernel width for rbf_svm.
    max_depth, min_leaf    decision tree limits (also per forest tree).
    n_trees, feature_fraction, bootstrap    random forest controls; the
                default feature fraction is sqrt(d)/d.
    epochs      subgradient passes for the SVM trainers.
    """

    kind: str
    c: float = 1.0
    k: int = 3
    gamma: float = 0.1
    max_depth: int = 20
    min_leaf: int = 2
    n_trees: int = 50
    feature_fraction: float | None = None
    bootstrap: bool = True
    epochs: int = 50
    train_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth < 1 or self.min_leaf < 1 or self.epochs < 1:
            raise ValueError("max_depth, min_leaf and epochs must be >= 1")
        if self.feature_fraction is not None and not 0 < self.feature_fraction <= 1:
            raise ValueError("feature_fraction must be in (0, 1]")


class Model:
    """Trained classifier: a pure function from feature vector to 0/1 label."""

    kind: str = ""
    d: int = 0

    def predict(self, x: np.ndarray) -> int:
        x = self._check(x)
        return int(self.predict_batch(x[None, :])[0])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise ValueError(
                f"dimension mismatch: expected {self.d} features, got {x.shape}"
            )
        return x

    def _check_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(
                f"dimension mismatch: expected (n, {self.d}), got {X.shape}"
            )
        return X

    def to_dict(self) -> dict:
        raise NotImplementedError


class LinearSVMModel(Model):
    kind = "linear_svm"

    def __init__(self, w: np.ndarray, b: float):
        self.w = np.asarray(w, dtype=np.float64)
        self.b = float(b)
        self.d = self.w.shape[0]

    def decision(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.w + self.b

    def predict(self, x: np.ndarray) -> int:
        x = self._check(x)
        return int(x @ self.w + self.b >= 0.0)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = self._check_batch(X)
        return (self.decision(X) >= 0.0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "w": [float(v) for v in self.w],
            "b": self.b,
        }


class KnnModel(Model):
    kind = "knn"

    def __init__(self, samples: np.ndarray, labels: np.ndarray, k: int):
        self.samples = np.asarray(samples, dtype=np.float64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.k = int(k)
        self.d = self.samples.shape[1]

    def predict(self, x: np.ndarray) -> int:
        x = self._check(x)
        dist = np.einsum("ij,ij->i", self.samples - x, self.samples - x)
        k = min(self.k, self.samples.shape[0])
        # stable sort keeps equal-distance ties in stored order
        nearest = np.argsort(dist, kind="stable")[:k]
        return int(2 * int(self.labels[nearest].sum()) >= k)

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = self._check_batch(X)
        sq = (
            (X**2).sum(axis=1)[:, None]
            + (self.samples**2).sum(axis=1)[None, :]
            - 2.0 * X @ self.samples.T
        )
        k = min(self.k, self.samples.shape[0])
        nearest = np.argsort(sq, axis=1, kind="stable")[:, :k]
        votes = self.labels[nearest].sum(axis=1)
        return (2 * votes >= k).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "k": self.k,
            "samples": [[float(v) for v in row] for row in self.samples],
            "labels": [int(v) for v in self.labels],
        }


class DecisionTreeModel(Model):
    """Binary tree stored as parallel arrays; feature[i] == -1 marks a leaf."""

    kind = "decision_tree"

    def __init__(self, feature, threshold, left, right, leaf_label, d: int):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.leaf_label = np.asarray(leaf_label, dtype=np.int64)
        self.d = int(d)

    def predict(self, x: np.ndarray) -> int:
        x = self._check(x)
        return self._walk(x)

    def _walk(self, x: np.ndarray) -> int:
        node = 0
        feature = self.feature
        while feature[node] >= 0:
            if x[feature[node]] <= self.threshold[node]:
                node = self.left[node]
            else:
                node = self.right[node]
        return int(self.leaf_label[node])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = self._check_batch(X)
        out = np.empty(X.shape[0], dtype=np.int64)
        self._fill(0, np.arange(X.shape[0]), X, out)
        return out

    def _fill(self, node: int, idx: np.ndarray, X: np.ndarray, out: np.ndarray):
        f = self.feature[node]
        if f < 0:
            out[idx] = self.leaf_label[node]
            return
        goes_left = X[idx, f] <= self.threshold[node]
        self._fill(self.left[node], idx[goes_left], X, out)
        self._fill(self.right[node], idx[~goes_left], X, out)

    @property
    def depth(self) -> int:
        def walk(node, level):
            if self.feature[node] < 0:
                return level
            return max(
                walk(self.left[node], level + 1), walk(self.right[node], level + 1)
            )

        return walk(0, 0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "feature": [int(v) for v in self.feature],
            "threshold": [float(v) for v in self.threshold],
            "left": [int(v) for v in self.left],
            "right": [int(v) for v in self.right],
            "leaf_label": [int(v) for v in self.leaf_label],
        }


class RandomForestModel(Model):
    kind = "random_forest"

    def __init__(self, trees: list[DecisionTreeModel]):
        self.trees = list(trees)
        self.d = self.trees[0].d

    def predict(self, x: np.ndarray) -> int:
        x = self._check(x)
        votes = 0
        for tree in self.trees:
            votes += tree._walk(x)
        return int(2 * votes >= len(self.trees))

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = self._check_batch(X)
        votes = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees:
            votes += tree.predict_batch(X)
        return (2 * votes >= len(self.trees)).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "trees": [t.to_dict() for t in self.trees],
        }


class RbfSVMModel(Model):
    kind = "rbf_svm"

    def __init__(self, support_vectors: np.ndarray, coefficients: np.ndarray,
                 gamma: float):
        self.support_vectors = np.asarray(support_vectors, dtype=np.float64)
        self.coefficients = np.asarray(coefficients, dtype=np.float64)
        self.gamma = float(gamma)
        self.d = self.support_vectors.shape[1]

    def decision(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        sq = (
            (X**2).sum(axis=1)[:, None]
            + (self.support_vectors**2).sum(axis=1)[None, :]
            - 2.0 * X @ self.support_vectors.T
        )
        return np.exp(-self.gamma * np.maximum(sq, 0.0)) @ self.coefficients

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        X = self._check_batch(X)
        return (self.decision(X) >= 0.0).astype(np.int64)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "d": self.d,
            "gamma": self.gamma,
            "support_vectors": [[float(v) for v in r] for r in self.support_vectors],
            "coefficients": [float(v) for v in self.coefficients],
        }


# ---------------------------------------------------------------------------
# training
# ---------------------------------------------------------------------------


def _check_trainable(data: Dataset):
    if data.n == 0:
        raise ValueError("cannot train on an empty dataset")
    legit, malicious = data.class_counts()
    if legit == 0 or malicious == 0:
        raise ValueError("training data must contain both classes")


def _train_linear_svm(spec: ModelSpec, data: Dataset) -> LinearSVMModel:
    X, y = data.samples, 2.0 * data.labels - 1.0
    n, d = X.shape
    lam = 1.0 / (spec.c * n)
    rng = Rng(spec.train_seed)
    w = np.zeros(d)
    b = 0.0
    t = 0
    for _ in range(spec.epochs):
        for i in rng.permutation(n):
            t += 1
            violated = y[i] * (X[i] @ w + b) < 1.0
            # step 1/(lam*t) makes the shrink factor exactly (1 - 1/t)
            w *= 1.0 - 1.0 / t
            if violated:
                eta = 1.0 / (lam * t)
                w += (eta * y[i]) * X[i]
                b += eta * y[i]
    return LinearSVMModel(w, _center_bias(w, X, y))


def _center_bias(w: np.ndarray, X: np.ndarray, y: np.ndarray) -> float:
    """Exact 1-D minimizer of the mean hinge loss in the bias, weights fixed.

    The loss is convex piecewise-linear in b with a flat optimal interval;
    the midpoint is returned.  Settles the bias deterministically where the
    stochastic updates would otherwise leave it wandering (the regularizer
    does not touch b, so this never worsens the training objective).
    """
    scores = X @ w
    breakpoints = np.sort(np.where(y > 0, 1.0 - scores, -1.0 - scores))
    n_pos = int((y > 0).sum())
    lo = breakpoints[n_pos - 1]
    hi = breakpoints[n_pos] if n_pos < breakpoints.shape[0] else lo
    return float(0.5 * (lo + hi))


class _TreeBuilder:
    def __init__(self, X, y, max_depth, min_leaf, n_features, rng):
        self.X = X
        self.y = y
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.n_features = n_features  # candidates per node; None = all
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.leaf: list[int] = []

    def build(self) -> DecisionTreeModel:
        self._grow(np.arange(self.X.shape[0]), 0)
        return DecisionTreeModel(
            self.feature, self.threshold, self.left, self.right, self.leaf,
            d=self.X.shape[1],
        )

    def _add_leaf(self, idx: np.ndarray) -> int:
        node = len(self.feature)
        malicious = int(self.y[idx].sum())
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf.append(int(2 * malicious >= idx.size))
        return node

    def _grow(self, idx: np.ndarray, depth: int) -> int:
        y_sub = self.y[idx]
        malicious = int(y_sub.sum())
        if (
            depth >= self.max_depth
            or idx.size < 2 * self.min_leaf
            or malicious == 0
            or malicious == idx.size
        ):
            return self._add_leaf(idx)
        split = self._best_split(idx, y_sub, malicious)
        if split is None:
            return self._add_leaf(idx)
        f, thr = split
        node = len(self.feature)
        self.feature.append(f)
        self.threshold.append(thr)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf.append(-1)
        goes_left = self.X[idx, f] <= thr
        self.left[node] = self._grow(idx[goes_left], depth + 1)
        self.right[node] = self._grow(idx[~goes_left], depth + 1)
        return node

    def _candidate_features(self) -> np.ndarray:
        d = self.X.shape[1]
        if self.n_features is None or self.n_features >= d:
            return np.arange(d)
        # sample without replacement, then sort for a deterministic scan order
        perm = self.rng.permutation(d)[: self.n_features]
        return np.sort(perm)

    def _best_split(self, idx, y_sub, malicious):
        n = idx.size
        best_f, best_thr, best_score = -1, 0.0, np.inf
        for f in self._candidate_features():
            vals = self.X[idx, f]
            order = np.argsort(vals, kind="stable")
            v = vals[order]
            prefix_mal = np.cumsum(y_sub[order])[:-1]
            left_n = np.arange(1, n)
            valid = v[1:] != v[:-1]
            if self.min_leaf > 1:
                valid &= (left_n >= self.min_leaf) & (n - left_n >= self.min_leaf)
            if not valid.any():
                continue
            right_n = n - left_n
            right_mal = malicious - prefix_mal
            pl = prefix_mal / left_n
            pr = right_mal / right_n
            gini_l = 2.0 * pl * (1.0 - pl)
            gini_r = 2.0 * pr * (1.0 - pr)
            score = np.where(
                valid, (left_n * gini_l + right_n * gini_r) / n, np.inf
            )
            j = int(np.argmin(score))
            if score[j] < best_score:
                best_f = int(f)
                best_thr = 0.5 * (v[j] + v[j + 1])
                best_score = float(score[j])
        if best_f < 0:
            return None
        return best_f, best_thr


def _train_decision_tree(spec: ModelSpec, data: Dataset) -> DecisionTreeModel:
    return _TreeBuilder(
        data.samples, data.labels, spec.max_depth, spec.min_leaf,
        n_features=None, rng=Rng(spec.train_seed),
    ).build()


def _train_random_forest(spec: ModelSpec, data: Dataset) -> RandomForestModel:
    X, y = data.samples, data.labels
    n, d = X.shape
    fraction = spec.feature_fraction
    if fraction is None:
        fraction = np.sqrt(d) / d
    n_features = max(1, int(round(fraction * d)))
    rng = Rng(spec.train_seed)
    trees = []
    for t in range(spec.n_trees):
        tree_rng = rng.derive("tree", t)
        if spec.bootstrap:
            idx = tree_rng.integers(n, n)
        else:
            idx = np.arange(n)
        subset = None if n_features >= d else n_features
        trees.append(
            _TreeBuilder(
                X[idx], y[idx], spec.max_depth, spec.min_leaf,
                n_features=subset, rng=tree_rng,
            ).build()
        )
    return RandomForestModel(trees)


def _train_rbf_svm(spec: ModelSpec, data: Dataset) -> RbfSVMModel:
    X, y = data.samples, 2.0 * data.labels - 1.0
    n = X.shape[0]
    lam = 1.0 / (spec.c * n)
    sq = (
        (X**2).sum(axis=1)[:, None]
        + (X**2).sum(axis=1)[None, :]
        - 2.0 * X @ X.T
    )
    K = np.exp(-spec.gamma * np.maximum(sq, 0.0))
    rng = Rng(spec.train_seed)
    alpha = np.zeros(n)
    t = 0
    for _ in range(spec.epochs):
        for i in rng.permutation(n):
            t += 1
            decision = (K[i] @ (alpha * y)) / (lam * t)
            if y[i] * decision < 1.0:
                alpha[i] += 1.0
    support = alpha > 0
    return RbfSVMModel(X[support], alpha[support] * y[support], spec.gamma)


def train(spec: ModelSpec, data: Dataset) -> Model:
    """Train a model of the requested kind; deterministic given (spec, data)."""
    _check_trainable(data)
    if spec.kind == "linear_svm":
        return _train_linear_svm(spec, data)
    if spec.kind == "knn":
        return KnnModel(data.samples, data.labels, spec.k)
    if spec.kind == "decision_tree":
        return _train_decision_tree(spec, data)
    if spec.kind == "random_forest":
        return _train_random_forest(spec, data)
    if spec.kind == "rbf_svm":
        return _train_rbf_svm(spec, data)
    raise ValueError(f"unknown model kind {spec.kind!r}")


def predict_label(model: Model, x: np.ndarray) -> int:
    """0/1 label for one feature vector."""
    return model.predict(x)


def holdout_accuracy(model: Model, data: Dataset) -> float:
    """Fraction of correct predictions on a labeled dataset."""
    if data.n == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    return float((model.predict_batch(data.samples) == data.labels).mean())


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def model_from_dict(doc: dict) -> Model:
    kind = doc.get("kind")
    if kind == "linear_svm":
        return LinearSVMModel(np.array(doc["w"], dtype=np.float64), doc["b"])
    if kind == "knn":
        return KnnModel(
            np.array(doc["samples"], dtype=np.float64),
            np.array(doc["labels"], dtype=np.int64),
            doc["k"],
        )
    if kind == "decision_tree":
        return DecisionTreeModel(
            doc["feature"], doc["threshold"], doc["left"], doc["right"],
            doc["leaf_label"], d=doc["d"],
        )
    if kind == "random_forest":
        return RandomForestModel([model_from_dict(t) for t in doc["trees"]])
    if kind == "rbf_svm":
        return RbfSVMModel(
            np.array(doc["support_vectors"], dtype=np.float64),
            np.array(doc["coefficients"], dtype=np.float64),
            doc["gamma"],
        )
    raise ValueError(f"unknown model kind {kind!r}")


def save_model(model: Model, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_dict()))


def load_model(path: str | Path) -> Model:
    return model_from_dict(json.loads(Path(path).read_text()))
