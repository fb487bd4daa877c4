"""The six model families behind one probability-prediction contract.

Every trained model exposes ``predict_proba(X) -> probabilities in [0, 1]``
for a 1-D vector or a 2-D batch of the training width. Fitting is
deterministic given the seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, InputError
from .specs import (
    AdaBoostSpec,
    ForestSpec,
    GbdtSpec,
    KnnSpec,
    LogitSpec,
    ModelSpec,
    TreeSpec,
    validate_spec,
)
from .tree import TreeArrays, fit_gini_tree, fit_second_order_tree, midpoint_threshold

_EPS_DISTANCE = 1e-12
_ERR_FLOOR = 1e-10


def sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _check_training_data(X, y, spec):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or len(X) != len(y):
        raise InputError("training data must be a (n, M) matrix with n labels")
    if len(y) < 2:
        raise DataError("need at least 2 training rows")
    if not np.all(np.isfinite(X)):
        raise DataError("training features must be finite")
    if not np.all((y == 0) | (y == 1)):
        raise DataError("labels must be binary")
    if not isinstance(spec, KnnSpec) and (y.sum() == 0 or y.sum() == len(y)):
        raise DataError(f"single-class training data is not fittable for {spec.family}")
    return X, y


def _as_batch(x, width: int):
    x = np.asarray(x, dtype=float)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != width:
        raise InputError(f"expected feature width {width}, got shape {x.shape}")
    return x, squeeze


def _standardize_stats(X):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0, 1.0, std)
    return mean, std


@dataclass
class LogitModel:
    spec: LogitSpec
    weights: np.ndarray
    intercept: float
    mean: np.ndarray
    std: np.ndarray

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def predict_proba(self, x):
        X, squeeze = _as_batch(x, self.n_features)
        z = (X - self.mean) / self.std
        p = sigmoid(z @ self.weights + self.intercept)
        return p[0] if squeeze else p


def _fit_logit(spec: LogitSpec, X, y, seed=0) -> LogitModel:
    mean, std = _standardize_stats(X)
    Z = (X - mean) / std
    n, m = Z.shape
    w = np.zeros(m)
    b = 0.0
    # fixed step from the logistic-loss Lipschitz bound
    Z1 = np.column_stack([Z, np.ones(n)])
    lip = 0.25 * float(np.linalg.eigvalsh(Z1.T @ Z1 / n)[-1]) + spec.l2_lambda
    step = 1.0 / lip
    yf = y.astype(float)
    for _ in range(spec.max_iters):
        p = sigmoid(Z @ w + b)
        r = p - yf
        gw = Z.T @ r / n + spec.l2_lambda * w
        gb = float(r.mean())
        if math.sqrt(float(gw @ gw) + gb * gb) < spec.tol:
            break
        w -= step * gw
        b -= step * gb
    return LogitModel(spec, w, float(b), mean, std)


@dataclass
class KnnModel:
    spec: KnnSpec
    X: np.ndarray  # standardized training rows
    y: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def predict_proba(self, x):
        Q, squeeze = _as_batch(x, self.n_features)
        Z = (Q - self.mean) / self.std
        k = min(self.spec.k, len(self.y))
        d2 = np.maximum(
            np.sum(Z**2, axis=1)[:, None]
            + np.sum(self.X**2, axis=1)[None, :]
            - 2.0 * (Z @ self.X.T),
            0.0,
        )
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        labels = self.y[nearest].astype(float)
        if self.spec.distance_weighted:
            w = 1.0 / (np.sqrt(np.take_along_axis(d2, nearest, axis=1)) + _EPS_DISTANCE)
            out = np.sum(w * labels, axis=1) / np.sum(w, axis=1)
        else:
            out = labels.mean(axis=1)
        return out[0] if squeeze else out


def _fit_knn(spec: KnnSpec, X, y, seed=0) -> KnnModel:
    mean, std = _standardize_stats(X)
    return KnnModel(spec, (X - mean) / std, y.copy(), mean, std)


@dataclass
class TreeModel:
    spec: TreeSpec
    tree: TreeArrays
    n_features: int

    def predict_proba(self, x):
        X, squeeze = _as_batch(x, self.n_features)
        p = self.tree.predict(X)
        return p[0] if squeeze else p


def _fit_tree(spec: TreeSpec, X, y, seed=0) -> TreeModel:
    tree = fit_gini_tree(X, y, spec.max_depth, spec.min_leaf)
    return TreeModel(spec, tree, X.shape[1])


@dataclass
class ForestModel:
    spec: ForestSpec
    trees: list[TreeArrays]
    n_features: int

    def predict_proba(self, x):
        X, squeeze = _as_batch(x, self.n_features)
        p = np.zeros(len(X))
        for t in self.trees:
            p += t.predict(X)
        p /= len(self.trees)
        return p[0] if squeeze else p


def _fit_forest(spec: ForestSpec, X, y, seed=0) -> ForestModel:
    n = len(y)
    trees = []
    for t in range(spec.n_trees):
        rng = np.random.default_rng(np.random.SeedSequence([seed, spec.seed, t]))
        if spec.bootstrap:
            idx = rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        trees.append(
            fit_gini_tree(Xb, yb, spec.max_depth, spec.min_leaf, spec.feature_subsample, rng)
        )
    return ForestModel(spec, trees, X.shape[1])


@dataclass
class Stump:
    feature: int
    threshold: float
    left_is_positive: bool
    alpha: float

    def vote(self, X) -> np.ndarray:
        left = X[:, self.feature] <= self.threshold
        return left if self.left_is_positive else ~left


@dataclass
class AdaBoostModel:
    spec: AdaBoostSpec
    stumps: list[Stump]
    n_features: int

    def predict_proba(self, x):
        X, squeeze = _as_batch(x, self.n_features)
        total = sum(s.alpha for s in self.stumps)
        if total <= 0:
            p = np.full(len(X), 0.5)
        else:
            votes = np.zeros(len(X))
            for s in self.stumps:
                votes += s.alpha * s.vote(X)
            p = votes / total
        return p[0] if squeeze else p


def _best_stump(X, y, w):
    """Exhaustive weighted-error search over (feature, midpoint, polarity)."""
    n, m = X.shape
    wpos_total = float(w[y == 1].sum())
    best = (np.inf, -1, 0.0, True)
    for j in range(m):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        ws = w[order]
        cum_pos = np.cumsum(np.where(y[order] == 1, ws, 0.0))
        cum_all = np.cumsum(ws)
        cuts = np.nonzero(xs[:-1] < xs[1:])[0]
        if len(cuts) == 0:
            continue
        # left predicts positive: wrong = negatives left + positives right
        err_left_pos = (cum_all[cuts] - cum_pos[cuts]) + (wpos_total - cum_pos[cuts])
        err_right_pos = 1.0 - err_left_pos  # weights are normalized
        for errs, polarity in ((err_left_pos, True), (err_right_pos, False)):
            k = int(np.argmin(errs))
            if errs[k] < best[0]:
                c = cuts[k]
                best = (
                    float(errs[k]),
                    j,
                    midpoint_threshold(float(xs[c]), float(xs[c + 1])),
                    polarity,
                )
    return best


def _fit_adaboost(spec: AdaBoostSpec, X, y, seed=0) -> AdaBoostModel:
    n = len(y)
    w = np.full(n, 1.0 / n)
    stumps: list[Stump] = []
    for _ in range(spec.n_rounds):
        err, feat, thr, left_pos = _best_stump(X, y, w)
        if feat < 0 or err >= 0.5:
            break
        err = max(err, _ERR_FLOOR)
        alpha = spec.learning_rate * math.log((1.0 - err) / err)
        stump = Stump(feat, thr, left_pos, alpha)
        stumps.append(stump)
        if err <= _ERR_FLOOR:
            break  # perfect stump; nothing left to reweight
        wrong = stump.vote(X) != (y == 1)
        w = w * np.exp(alpha * wrong)
        w /= w.sum()
    return AdaBoostModel(spec, stumps, X.shape[1])


@dataclass
class GbdtModel:
    """Second-order gradient boosting on logistic loss.

    Stored leaf values are already shrunk by the learning rate, so the
    margin is ``base_score + sum of tree outputs`` in log-odds.
    """

    spec: GbdtSpec
    base_score: float  # log-odds
    trees: list[TreeArrays]
    n_features: int

    def margin(self, x):
        X, squeeze = _as_batch(x, self.n_features)
        z = np.full(len(X), self.base_score)
        for t in self.trees:
            z += t.predict(X)
        return z[0] if squeeze else z

    def predict_proba(self, x):
        return sigmoid(self.margin(x))


def _fit_gbdt(spec: GbdtSpec, X, y, seed=0) -> GbdtModel:
    yf = y.astype(float)
    p0 = min(max(float(yf.mean()), 1e-12), 1.0 - 1e-12)
    base = math.log(p0 / (1.0 - p0))
    margins = np.full(len(y), base)
    trees = []
    for _ in range(spec.n_rounds):
        p = sigmoid(margins)
        grad = p - yf
        hess = p * (1.0 - p)
        raw = fit_second_order_tree(X, grad, hess, spec.max_depth, spec.min_leaf, spec.l2_lambda)
        raw.values = raw.values * spec.learning_rate
        trees.append(raw)
        margins += raw.predict(X)
    return GbdtModel(spec, base, trees, X.shape[1])


_FITTERS = {
    LogitSpec: _fit_logit,
    KnnSpec: _fit_knn,
    TreeSpec: _fit_tree,
    ForestSpec: _fit_forest,
    AdaBoostSpec: _fit_adaboost,
    GbdtSpec: _fit_gbdt,
}

TrainedModel = LogitModel | KnnModel | TreeModel | ForestModel | AdaBoostModel | GbdtModel


def fit_classifier(spec: ModelSpec, X, y, seed: int = 0) -> TrainedModel:
    """Fit any family's spec on binary-labeled data; deterministic per seed."""
    validate_spec(spec)
    X, y = _check_training_data(X, y, spec)
    return _FITTERS[type(spec)](spec, X, y, seed)


def predict_proba(model: TrainedModel, x):
    return model.predict_proba(x)


def model_trees(model) -> tuple[list[TreeArrays], float, float]:
    """Additive tree view: (trees, per-tree scale, base offset).

    The model output in its native additive space is
    ``base + scale * sum(tree(x) for tree in trees)``; probability for
    tree/forest, log-odds for the boosted model.
    """
    if isinstance(model, TreeModel):
        return [model.tree], 1.0, 0.0
    if isinstance(model, ForestModel):
        return model.trees, 1.0 / len(model.trees), 0.0
    if isinstance(model, GbdtModel):
        return model.trees, 1.0, model.base_score
    raise InputError(f"not a tree-based model: {type(model).__name__}")
