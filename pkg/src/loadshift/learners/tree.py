"""Binary decision trees stored as flat node arrays.

Internal nodes route ``x[feature] <= threshold`` to the left child.
Thresholds sit at midpoints of consecutive sorted unique values, so the
same arrays serve both the Gini-grown classification trees and the
second-order regression trees of the boosting model.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LEAF = -1
_MIN_GAIN = 1e-12


def midpoint_threshold(lo: float, hi: float) -> float:
    """Split threshold between two consecutive sorted values.

    Falls back to the lower value when the float midpoint rounds up to
    ``hi``, so ``x <= threshold`` always reproduces the scanned partition.
    """
    thr = (lo + hi) / 2.0
    return lo if thr >= hi else thr


@dataclass
class TreeArrays:
    features: np.ndarray  # int64, LEAF marks a leaf
    thresholds: np.ndarray
    lefts: np.ndarray  # int64 child indices
    rights: np.ndarray
    values: np.ndarray  # leaf payloads; 0.0 on internal nodes

    def predict(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(X.shape[0], dtype=np.int64)
        active = self.features[node] != LEAF
        while active.any():
            idx = np.nonzero(active)[0]
            nd = node[idx]
            go_left = X[idx, self.features[nd]] <= self.thresholds[nd]
            node[idx] = np.where(go_left, self.lefts[nd], self.rights[nd])
            active = self.features[node] != LEAF
        return self.values[node]

    def used_features(self) -> set[int]:
        return set(int(f) for f in self.features if f != LEAF)


@dataclass
class _Builder:
    features: list = field(default_factory=list)
    thresholds: list = field(default_factory=list)
    lefts: list = field(default_factory=list)
    rights: list = field(default_factory=list)
    values: list = field(default_factory=list)

    def add(self, feature, threshold, value) -> int:
        self.features.append(feature)
        self.thresholds.append(threshold)
        self.lefts.append(LEAF)
        self.rights.append(LEAF)
        self.values.append(value)
        return len(self.features) - 1

    def finish(self) -> TreeArrays:
        return TreeArrays(
            features=np.asarray(self.features, dtype=np.int64),
            thresholds=np.asarray(self.thresholds, dtype=float),
            lefts=np.asarray(self.lefts, dtype=np.int64),
            rights=np.asarray(self.rights, dtype=np.int64),
            values=np.asarray(self.values, dtype=float),
        )


def _candidate_features(m: int, feature_subsample, rng) -> np.ndarray:
    if feature_subsample is None and rng is not None:
        n_take = int(np.ceil(np.sqrt(m)))
    elif feature_subsample is not None:
        n_take = max(1, int(round(feature_subsample * m)))
    else:
        n_take = m
    if n_take >= m or rng is None:
        return np.arange(m)
    return np.sort(rng.choice(m, size=n_take, replace=False))


def fit_gini_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_leaf: int,
    feature_subsample=None,
    rng=None,
) -> TreeArrays:
    """CART with Gini impurity; leaf value = positive-class fraction.

    Splits with zero gain are rejected. Ties resolve to the first feature
    in index order, then the smallest threshold, so growth is deterministic
    for a fixed rng state.
    """
    b = _Builder()

    def grow(idx: np.ndarray, depth: int) -> int:
        ys = y[idx]
        n = len(idx)
        pos = float(ys.sum())
        value = pos / n
        if depth >= max_depth or n < 2 * min_leaf or pos == 0 or pos == n:
            return b.add(LEAF, 0.0, value)
        parent_gini = 1.0 - (pos / n) ** 2 - ((n - pos) / n) ** 2
        best_gain, best_feat, best_thr, best_left_mask = _MIN_GAIN, -1, 0.0, None
        for j in _candidate_features(X.shape[1], feature_subsample, rng):
            xs_all = X[idx, j]
            order = np.argsort(xs_all, kind="stable")
            xs = xs_all[order]
            cum_pos = np.cumsum(ys[order])
            cuts = np.nonzero(xs[:-1] < xs[1:])[0]
            if len(cuts) == 0:
                continue
            nl = cuts + 1.0
            ok = (nl >= min_leaf) & (n - nl >= min_leaf)
            cuts = cuts[ok]
            if len(cuts) == 0:
                continue
            nl = cuts + 1.0
            nr = n - nl
            pl = cum_pos[cuts].astype(float)
            pr = pos - pl
            gini_l = 1.0 - (pl / nl) ** 2 - ((nl - pl) / nl) ** 2
            gini_r = 1.0 - (pr / nr) ** 2 - ((nr - pr) / nr) ** 2
            gains = parent_gini - (nl * gini_l + nr * gini_r) / n
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best_feat = int(j)
                c = cuts[k]
                best_thr = midpoint_threshold(float(xs[c]), float(xs[c + 1]))
                best_left_mask = X[idx, j] <= best_thr
        if best_feat < 0:
            return b.add(LEAF, 0.0, value)
        node = b.add(best_feat, best_thr, 0.0)
        left_idx = idx[best_left_mask]
        right_idx = idx[~best_left_mask]
        b.lefts[node] = grow(left_idx, depth + 1)
        b.rights[node] = grow(right_idx, depth + 1)
        return node

    grow(np.arange(len(y)), 0)
    return b.finish()


def fit_second_order_tree(
    X: np.ndarray,
    grad: np.ndarray,
    hess: np.ndarray,
    max_depth: int,
    min_leaf: int,
    l2_lambda: float,
) -> TreeArrays:
    """Regression tree on gradient statistics; leaf weight = -G / (H + lambda)."""
    b = _Builder()
    lam = float(l2_lambda)

    def leaf_weight(idx):
        return -float(grad[idx].sum()) / (float(hess[idx].sum()) + lam)

    def grow(idx: np.ndarray, depth: int) -> int:
        n = len(idx)
        if depth >= max_depth or n < 2 * min_leaf:
            return b.add(LEAF, 0.0, leaf_weight(idx))
        g_tot = float(grad[idx].sum())
        h_tot = float(hess[idx].sum())
        parent_score = g_tot * g_tot / (h_tot + lam)
        best_gain, best_feat, best_thr, best_left_mask = _MIN_GAIN, -1, 0.0, None
        for j in range(X.shape[1]):
            xs_all = X[idx, j]
            order = np.argsort(xs_all, kind="stable")
            xs = xs_all[order]
            cg = np.cumsum(grad[idx][order])
            ch = np.cumsum(hess[idx][order])
            cuts = np.nonzero(xs[:-1] < xs[1:])[0]
            if len(cuts) == 0:
                continue
            nl = cuts + 1
            ok = (nl >= min_leaf) & (n - nl >= min_leaf)
            cuts = cuts[ok]
            if len(cuts) == 0:
                continue
            gl = cg[cuts]
            hl = ch[cuts]
            gr = g_tot - gl
            hr = h_tot - hl
            gains = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent_score)
            k = int(np.argmax(gains))
            if gains[k] > best_gain:
                best_gain = float(gains[k])
                best_feat = int(j)
                c = cuts[k]
                best_thr = midpoint_threshold(float(xs[c]), float(xs[c + 1]))
                best_left_mask = X[idx, j] <= best_thr
        if best_feat < 0:
            return b.add(LEAF, 0.0, leaf_weight(idx))
        node = b.add(best_feat, best_thr, 0.0)
        b.lefts[node] = grow(idx[best_left_mask], depth + 1)
        b.rights[node] = grow(idx[~best_left_mask], depth + 1)
        return node

    grow(np.arange(len(grad)), 0)
    return b.finish()
