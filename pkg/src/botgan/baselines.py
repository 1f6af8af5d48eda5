"""Reference bot classifiers: k-NN, linear SVM, MLP and random forest.

All four share ``train_baseline(kind, data, hyperparams, rng)`` and
``predict(model, features)`` / ``predict_scores(model, features)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import nncore
from .dataio import BOT, HUMAN, Dataset
from .errors import DomainError, ShapeError

KINDS = ("knn", "linear_svm", "mlp", "random_forest")

DEFAULTS = {
    "knn": {"k": 5},
    "linear_svm": {"lam": 1e-4, "passes": 20, "learning_rate": 0.05, "batch_size": 32},
    "mlp": {"hidden": [128, 128], "learning_rate": 0.002, "epochs": 20, "batch_size": 256, "dropout": 0.0},
    "random_forest": {"n_trees": 100, "max_depth": 12, "max_features": "sqrt", "bootstrap": True},
}


def _check_dim(expected: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1 and x.size == 0:
        x = x.reshape(0, expected)
    if x.ndim != 2 or x.shape[1] != expected:
        raise ShapeError(f"model expects {expected} features, got array of shape {x.shape}")
    return x


# --- k-NN -----------------------------------------------------------------

@dataclass
class KnnModel:
    x: np.ndarray
    y: np.ndarray
    k: int = 5
    kind: str = "knn"

    @property
    def dim(self) -> int:
        return self.x.shape[1]

    def scores(self, x: np.ndarray, chunk: int = 512) -> np.ndarray:
        x = _check_dim(self.dim, x)
        k = min(self.k, len(self.y))
        out = np.empty(len(x))
        train_sq = np.einsum("ij,ij->i", self.x, self.x)
        for start in range(0, len(x), chunk):
            q = x[start:start + chunk]
            d2 = train_sq[None, :] - 2.0 * q @ self.x.T + np.einsum("ij,ij->i", q, q)[:, None]
            nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
            out[start:start + chunk] = self.y[nn].mean(axis=1)
        return out


# --- linear SVM -----------------------------------------------------------

@dataclass
class LinearSvmModel:
    w: np.ndarray
    b: float
    loss_history: list[float] = field(default_factory=list)
    kind: str = "linear_svm"

    @property
    def dim(self) -> int:
        return self.w.size

    def margins(self, x: np.ndarray) -> np.ndarray:
        return _check_dim(self.dim, x) @ self.w + self.b

    def scores(self, x: np.ndarray) -> np.ndarray:
        return nncore.sigmoid(self.margins(x))


def svm_objective(w, b, x, s, lam) -> float:
    """Mean hinge loss plus (lam/2)||w||^2; ``s`` holds labels in {-1, +1}."""
    hinge = np.maximum(0.0, 1.0 - s * (x @ w + b))
    return float(hinge.mean() + 0.5 * lam * w @ w)


def _train_svm(x, y, rng, lam, passes, learning_rate, batch_size) -> LinearSvmModel:
    s = np.where(y == BOT, 1.0, -1.0)
    n, d = x.shape
    w, b = np.zeros(d), 0.0
    order = rng.permutation(n)  # one fixed order reused every pass
    history = [svm_objective(w, b, x, s, lam)]
    step = 0
    for _ in range(passes):
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            xb, sb = x[idx], s[idx]
            active = sb * (xb @ w + b) < 1.0
            gw = lam * w - (sb[active, None] * xb[active]).sum(0) / len(idx)
            gb = -sb[active].sum() / len(idx)
            step += 1
            eta = learning_rate / math.sqrt(step)
            w = w - eta * gw
            b = b - eta * gb
        history.append(svm_objective(w, b, x, s, lam))
    return LinearSvmModel(w, float(b), history)


# --- MLP ------------------------------------------------------------------

@dataclass
class MlpModel:
    params: nncore.MlpParams
    kind: str = "mlp"

    @property
    def dim(self) -> int:
        return self.params.in_dim

    def scores(self, x: np.ndarray) -> np.ndarray:
        x = _check_dim(self.dim, x)
        if len(x) == 0:
            return np.empty(0)
        return nncore.sigmoid(nncore.predict(self.params, x)[:, 0])


def _train_mlp(x, y, rng, hidden, learning_rate, epochs, batch_size, dropout) -> MlpModel:
    specs = nncore.dense_specs([x.shape[1], *hidden, 1], hidden="relu", output="identity")
    params = nncore.init_mlp(specs, rng)
    state = nncore.init_adam(params, learning_rate)
    target = y.astype(np.float64)
    for _ in range(epochs):
        order = rng.permutation(len(x))
        for start in range(0, len(x), batch_size):
            idx = order[start:start + batch_size]
            out, cache = nncore.forward(params, x[idx], True, dropout, rng)
            _, g = nncore.bce_with_logits(out[:, 0], target[idx])
            params, state = nncore.adam_step(params, nncore.backward(params, cache, g[:, None]), state)
    return MlpModel(params)


# --- decision tree / random forest ---------------------------------------

@dataclass
class DecisionTree:
    """CART tree on Gini impurity, stored as flat node arrays (-1 = leaf)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray  # fraction of bots among training rows reaching the node
    dim: int

    def leaf_values(self, x: np.ndarray) -> np.ndarray:
        x = _check_dim(self.dim, x)
        node = np.zeros(len(x), dtype=np.int64)
        active = self.feature[node] >= 0
        while np.any(active):
            rows = np.flatnonzero(active)
            nd = node[rows]
            go_left = x[rows, self.feature[nd]] <= self.threshold[nd]
            node[rows] = np.where(go_left, self.left[nd], self.right[nd])
            active = self.feature[node] >= 0
        return self.value[node]

    def predict(self, x: np.ndarray) -> np.ndarray:
        return (self.leaf_values(x) > 0.5).astype(np.uint8)


def _best_split(x: np.ndarray, y: np.ndarray, feats: np.ndarray):
    """Best (feature, threshold) over candidate columns by weighted Gini, or None."""
    n = len(y)
    xs = x[:, feats]
    order = np.argsort(xs, axis=0, kind="stable")
    vals = np.take_along_axis(xs, order, axis=0)
    ys = y[order].astype(np.float64)
    left_bot = np.cumsum(ys, axis=0)[:-1]
    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    right_n = n - left_n
    right_bot = ys.sum(axis=0)[None, :] - left_bot
    # n * Gini = n - (b^2 + (n - b)^2) / n, summed over children
    cost = (left_n - (left_bot**2 + (left_n - left_bot) ** 2) / left_n
            + right_n - (right_bot**2 + (right_n - right_bot) ** 2) / right_n)
    valid = vals[:-1] < vals[1:]
    if not np.any(valid):
        return None
    cost = np.where(valid, cost, np.inf)
    flat = int(np.argmin(cost.T.ravel()))  # feature-major: ties go to the earlier feature
    j, i = divmod(flat, n - 1)
    thr = 0.5 * (float(vals[i, j]) + float(vals[i + 1, j]))
    return int(feats[j]), thr


def fit_tree(x: np.ndarray, y: np.ndarray, max_depth: int | None = None,
             max_features: int | None = None, rng: np.random.Generator | None = None) -> DecisionTree:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = x.shape
    m = d if max_features is None else max(1, min(d, int(max_features)))
    if m < d and rng is None:
        raise ValueError("feature subsampling needs an rng")
    feature, threshold, left, right, value = [], [], [], [], []

    def new_node(rows):
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(float(y[rows].mean()))
        return len(feature) - 1

    root = new_node(np.arange(n))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node, rows, depth = stack.pop()
        yr = y[rows]
        if len(rows) < 2 or yr.min() == yr.max() or (max_depth is not None and depth >= max_depth):
            continue
        feats = np.arange(d) if m == d else np.sort(rng.choice(d, size=m, replace=False))
        split = _best_split(x[rows], yr, feats)
        if split is None:
            continue
        f, thr = split
        mask = x[rows, f] <= thr
        l_rows, r_rows = rows[mask], rows[~mask]
        feature[node], threshold[node] = f, thr
        left[node] = new_node(l_rows)
        right[node] = new_node(r_rows)
        # push right first so the left subtree is numbered first
        stack.append((right[node], r_rows, depth + 1))
        stack.append((left[node], l_rows, depth + 1))
    return DecisionTree(
        np.array(feature, dtype=np.int64), np.array(threshold), np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64), np.array(value), d,
    )


@dataclass
class ForestModel:
    trees: list[DecisionTree]
    kind: str = "random_forest"

    @property
    def dim(self) -> int:
        return self.trees[0].dim

    def scores(self, x: np.ndarray) -> np.ndarray:
        x = _check_dim(self.dim, x)
        votes = np.zeros(len(x))
        for t in self.trees:
            votes += t.predict(x)
        return votes / len(self.trees)


def _train_forest(x, y, rng, n_trees, max_depth, max_features, bootstrap) -> ForestModel:
    n, d = x.shape
    if max_features == "sqrt":
        m = math.ceil(math.sqrt(d))
    elif max_features in (None, "all"):
        m = d
    else:
        m = int(max_features)
    trees = []
    for _ in range(n_trees):
        tree_rng = np.random.default_rng(rng.integers(0, 2**63))
        rows = tree_rng.integers(0, n, n) if bootstrap else np.arange(n)
        trees.append(fit_tree(x[rows], y[rows], max_depth, m, tree_rng))
    return ForestModel(trees)


# --- shared contract ------------------------------------------------------

BaselineModel = KnnModel | LinearSvmModel | MlpModel | ForestModel


def train_baseline(kind: str, train_data: Dataset, hyperparams: dict | None = None,
                   rng: np.random.Generator | None = None) -> BaselineModel:
    if kind not in KINDS:
        raise DomainError(f"unknown baseline kind {kind!r}; choose from {KINDS}")
    hp = {**DEFAULTS[kind], **(hyperparams or {})}
    data = train_data.labeled()
    x = data.features.astype(np.float64)
    y = data.labels.astype(np.int64)
    if not (np.any(y == HUMAN) and np.any(y == BOT)) and kind != "knn":
        raise DomainError(f"{kind} training needs both classes present")
    if len(y) == 0:
        raise DomainError("no labeled rows to train on")
    if rng is None:
        rng = np.random.default_rng(0)
    if kind == "knn":
        return KnnModel(x, y.astype(np.float64), int(hp["k"]))
    if kind == "linear_svm":
        return _train_svm(x, y, rng, **hp)
    if kind == "mlp":
        return _train_mlp(x, y, rng, **hp)
    return _train_forest(x, y, rng, **hp)


def predict_scores(model: BaselineModel, features: np.ndarray) -> np.ndarray:
    """Bot score in [0, 1] per row."""
    return model.scores(features)


def predict(model: BaselineModel, features: np.ndarray) -> np.ndarray:
    return (predict_scores(model, features) > 0.5).astype(np.uint8)
