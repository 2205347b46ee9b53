"""Random forest over sparse count features, written from first principles.

Trees are binary CART splits on ``value <= threshold`` with the Gini
criterion.  Candidate thresholds are midpoints between consecutive distinct
values of a feature within the node; ties between equally good splits go to
the lower feature index, then the lower threshold.  Absent entries of the
sparse matrix are genuine zeros and always fall on the left side, because
every candidate threshold is positive.

Each tree draws its randomness from an independent stream derived from
(seed, tree index), so a forest is reproducible bit for bit regardless of
how many workers fit it.  The split search and the per-row tree walk run as
compiled kernels when numba is importable; the same functions run as plain
Python otherwise (set ``LDEB_NO_NUMBA=1`` to force that).
"""

from __future__ import annotations

import logging
import math
import os

import numpy as np
import scipy.sparse as sp
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, ClassifierMixin

from .exceptions import (
    ConfigError,
    EmptyNodeError,
    ModelError,
    OneClassTrainingError,
    ShapeMismatchError,
    TooFewRowsError,
)

logger = logging.getLogger(__name__)


def gini(counts) -> float:
    """Gini impurity of a node with the given class counts.

    ``1 - sum((c / total)**2)``; 0 for a pure node, at most 0.5 for two
    classes.  A node with zero total count has no impurity to speak of.
    """
    values = [int(c) for c in counts]
    if any(c < 0 for c in values):
        raise ValueError("class counts must be non-negative")
    total = sum(values)
    if total == 0:
        raise EmptyNodeError("gini of an empty node is undefined")
    acc = 0.0
    for c in sorted(values):   # fixed order: impurity is class-order-free
        p = c / total
        acc += p * p
    return 1.0 - acc


def _best_split_impl(indptr, indices, data, idx, w, wy, w_total, w1_total,
                     parent_gini, cand):
    """Exact best split over the candidate features of one node.

    The node is given as sorted row ids ``idx`` with per-row weights ``w``
    and weighted positive labels ``wy``; the matrix is CSC.  Scans features
    in the order given and thresholds in ascending order, replacing the
    incumbent only on a strictly lower weighted child impurity, which makes
    the tie-break (lowest feature, then lowest threshold) implicit.

    Returns (found, feature, threshold).  Written to run both as plain
    Python and under numba's nopython mode; keep it free of fancy APIs.
    """
    n_node = idx.shape[0]
    best_feature = -1
    best_threshold = 0.0
    best_child = parent_gini
    found = 0
    for ci in range(cand.shape[0]):
        j = cand[ci]
        lo = indptr[j]
        hi = indptr[j + 1]
        m = hi - lo
        if m == 0:
            continue
        cap = m if m < n_node else n_node
        vals = np.empty(cap, np.float64)
        ws = np.empty(cap, np.float64)
        w1s = np.empty(cap, np.float64)
        k = 0
        if m <= n_node:
            # walk the column, binary-search each row id in the node
            for p in range(lo, hi):
                r = indices[p]
                a = 0
                b = n_node
                pos = -1
                while a < b:
                    mid = (a + b) // 2
                    u = idx[mid]
                    if u == r:
                        pos = mid
                        break
                    if u < r:
                        a = mid + 1
                    else:
                        b = mid
                if pos >= 0:
                    vals[k] = data[p]
                    ws[k] = w[pos]
                    w1s[k] = wy[pos]
                    k += 1
        else:
            # node smaller than the column: search node rows in the column
            for pos in range(n_node):
                r = idx[pos]
                a = lo
                b = hi
                pp = -1
                while a < b:
                    mid = (a + b) // 2
                    u = indices[mid]
                    if u == r:
                        pp = mid
                        break
                    if u < r:
                        a = mid + 1
                    else:
                        b = mid
                if pp >= 0:
                    vals[k] = data[pp]
                    ws[k] = w[pos]
                    w1s[k] = wy[pos]
                    k += 1
        if k == 0:
            continue
        sw = 0.0
        sw1 = 0.0
        for t in range(k):
            sw += ws[t]
            sw1 += w1s[t]
        wz = w_total - sw    # weight of the implicit-zero group
        wz1 = w1_total - sw1
        order = np.argsort(vals[:k])
        cw = 0.0
        cw1 = 0.0
        prev_v = 0.0
        have_prev = False
        if wz > 0.0:
            cw = wz
            cw1 = wz1
            have_prev = True
        i = 0
        while i < k:
            v = vals[order[i]]
            if have_prev:
                # boundary between the previous distinct value and v
                thr = 0.5 * (prev_v + v)
                cl1 = cw1
                cl0 = cw - cw1
                cr = w_total - cw
                cr1 = w1_total - cw1
                cr0 = cr - cr1
                gl = 1.0 - ((cl1 / cw) * (cl1 / cw) + (cl0 / cw) * (cl0 / cw))
                gr = 1.0 - ((cr1 / cr) * (cr1 / cr) + (cr0 / cr) * (cr0 / cr))
                child = (cw * gl + cr * gr) / w_total
                if child < best_child:
                    best_child = child
                    best_feature = j
                    best_threshold = thr
                    found = 1
            gw = 0.0
            gw1 = 0.0
            while i < k and vals[order[i]] == v:
                o = order[i]
                gw += ws[o]
                gw1 += w1s[o]
                i += 1
            cw += gw
            cw1 += gw1
            prev_v = v
            have_prev = True
    return found, best_feature, best_threshold


def _predict_rows_impl(feature, threshold, left, right, label, indptr, indices, data):
    n = indptr.shape[0] - 1
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        lo = indptr[i]
        hi = indptr[i + 1]
        nid = 0
        while feature[nid] >= 0:
            f = feature[nid]
            a = lo
            b = hi
            while a < b:
                m = (a + b) // 2
                if indices[m] < f:
                    a = m + 1
                else:
                    b = m
            val = 0.0
            if a < hi:
                if indices[a] == f:
                    val = data[a]
            nid = left[nid] if val <= threshold[nid] else right[nid]
        out[i] = label[nid]
    return out


def _compile(fn, what: str):
    if os.environ.get("LDEB_NO_NUMBA"):
        return fn, False
    try:
        from numba import njit
    except ImportError:
        logger.info("numba not available; %s runs as plain Python", what)
        return fn, False
    return njit(cache=True, nogil=True)(fn), True


_KERNEL, KERNEL_JIT = _compile(_best_split_impl, "split search")
_PREDICT_KERNEL, _ = _compile(_predict_rows_impl, "tree prediction")


class DecisionTree:
    """A grown tree as parallel node arrays; node 0 is the root.

    ``feature`` is -1 at leaves; ``counts`` holds the (weighted) class
    counts seen at each node during growth.
    """

    __slots__ = ("feature", "threshold", "left", "right", "counts")

    def __init__(self, feature, threshold, left, right, counts):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.counts = np.asarray(counts, dtype=np.int64)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def predict_rows(self, X: sp.csr_matrix) -> np.ndarray:
        """Per-row leaf vote: 1 when the leaf saw more 1s, else 0."""
        label = (self.counts[:, 1] > self.counts[:, 0]).astype(np.int64)
        return _PREDICT_KERNEL(
            self.feature, self.threshold, self.left, self.right, label,
            X.indptr, X.indices, np.asarray(X.data, dtype=np.float64))

    def to_nested(self):
        """Nested-list form: internal [feature, threshold, left, right],
        leaf [count0, count1]."""
        memo: list = [None] * self.n_nodes
        stack = [(0, False)]
        while stack:
            nid, ready = stack.pop()
            if self.feature[nid] < 0:
                memo[nid] = [int(self.counts[nid, 0]), int(self.counts[nid, 1])]
                continue
            li, ri = int(self.left[nid]), int(self.right[nid])
            if not ready:
                stack.append((nid, True))
                stack.append((ri, False))
                stack.append((li, False))
            else:
                memo[nid] = [int(self.feature[nid]), float(self.threshold[nid]),
                             memo[li], memo[ri]]
        return memo[0]

    @classmethod
    def from_nested(cls, node) -> "DecisionTree":
        feature: list[int] = []
        threshold: list[float] = []
        left: list[int] = []
        right: list[int] = []
        counts: list[tuple[int, int]] = []

        def alloc() -> int:
            feature.append(-1)
            threshold.append(float("nan"))
            left.append(-1)
            right.append(-1)
            counts.append((0, 0))
            return len(feature) - 1

        stack = [(node, -1, 0)]
        while stack:
            jn, parent, side = stack.pop()
            if not isinstance(jn, list) or len(jn) not in (2, 4):
                raise ModelError(f"malformed tree node: {jn!r}")
            nid = alloc()
            if parent >= 0:
                if side == 0:
                    left[parent] = nid
                else:
                    right[parent] = nid
            if len(jn) == 2:
                counts[nid] = (int(jn[0]), int(jn[1]))
            else:
                feature[nid] = int(jn[0])
                threshold[nid] = float(jn[1])
                stack.append((jn[3], nid, 1))
                stack.append((jn[2], nid, 0))
        return cls(feature, threshold, left, right, counts)


def best_split(X, y, candidate_features=None, sample_weight=None):
    """Best (feature, threshold) under weighted Gini, or None when no split
    reduces impurity.

    Considers every candidate feature (all features by default) and every
    midpoint between consecutive distinct values, exactly as tree growth
    does.  Useful on its own and as the reference entry point for testing.
    """
    X = sp.csc_matrix(X) if sp.issparse(X) else sp.csc_matrix(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.int64)
    if X.shape[0] != y.shape[0]:
        raise ShapeMismatchError(f"{X.shape[0]} rows vs {y.shape[0]} labels")
    if not np.isin(y, (0, 1)).all():
        raise ConfigError("labels must be binary 0/1")
    if sample_weight is None:
        w = np.ones(X.shape[0], dtype=np.float64)
    else:
        w = np.asarray(sample_weight, dtype=np.float64)
        if w.shape[0] != y.shape[0] or (w < 0).any():
            raise ConfigError("sample_weight must be non-negative, one per row")
    if candidate_features is None:
        cand = np.arange(X.shape[1], dtype=np.int64)
    else:
        cand = np.unique(np.asarray(candidate_features, dtype=np.int64))
        if cand.size and (cand[0] < 0 or cand[-1] >= X.shape[1]):
            raise ConfigError("candidate feature index out of range")
    idx = np.arange(X.shape[0], dtype=np.int64)
    wy = w * y
    w_total = float(w.sum())
    w1_total = float(wy.sum())
    if w_total == 0.0:
        raise EmptyNodeError("all rows have zero weight")
    p1 = w1_total / w_total
    parent = 1.0 - ((p1 * p1) + ((1.0 - p1) * (1.0 - p1)))
    found, f, thr = _KERNEL(
        X.indptr.astype(np.int64), X.indices.astype(np.int64),
        X.data.astype(np.float64), idx, w, wy, w_total, w1_total, parent, cand,
    )
    if not found:
        return None
    return int(f), float(thr)


def _grow_tree(indptr, indices, data, n_features, y_f, idx, w, max_features_n,
               max_depth, min_samples_split, rng) -> DecisionTree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[tuple[int, int]] = []

    def alloc() -> int:
        feature.append(-1)
        threshold.append(float("nan"))
        left.append(-1)
        right.append(-1)
        counts.append((0, 0))
        return len(feature) - 1

    root = alloc()
    stack = [(root, idx, w, 0)]
    while stack:
        nid, nidx, nw, depth = stack.pop()
        wy = nw * y_f[nidx]
        w1 = float(wy.sum())
        wt = float(nw.sum())
        w0 = wt - w1
        counts[nid] = (int(w0), int(w1))
        if w0 == 0.0 or w1 == 0.0 or wt < min_samples_split:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if max_features_n == 0:
            continue
        p1 = w1 / wt
        parent = 1.0 - ((p1 * p1) + ((1.0 - p1) * (1.0 - p1)))
        cand = rng.choice(n_features, size=max_features_n, replace=False)
        cand = np.sort(cand).astype(np.int64)
        found, f, thr = _KERNEL(indptr, indices, data, nidx, nw, wy, wt, w1,
                                parent, cand)
        if not found:
            continue
        lo, hi = indptr[f], indptr[f + 1]
        col_rows = indices[lo:hi]
        col_vals = data[lo:hi]
        pos = np.searchsorted(nidx, col_rows)
        ok = pos < nidx.shape[0]
        safe = np.where(ok, pos, 0)
        present = ok & (nidx[safe] == col_rows)
        go_right = np.zeros(nidx.shape[0], dtype=bool)
        go_right[safe[present & (col_vals > thr)]] = True
        lid = alloc()
        rid = alloc()
        feature[nid] = int(f)
        threshold[nid] = float(thr)
        left[nid] = lid
        right[nid] = rid
        stack.append((rid, nidx[go_right], nw[go_right], depth + 1))
        stack.append((lid, nidx[~go_right], nw[~go_right], depth + 1))
    return DecisionTree(feature, threshold, left, right, counts)


def _fit_one_tree(t, seed, indptr, indices, data, n_rows, n_features, y_f,
                  bootstrap, max_features_n, max_depth, min_samples_split):
    """Fit tree ``t`` from its own RNG stream; independent of all others."""
    rng = np.random.default_rng([seed, t])
    if bootstrap:
        draws = rng.integers(0, n_rows, size=n_rows)
        idx, mult = np.unique(draws, return_counts=True)
        idx = idx.astype(np.int64)
        w = mult.astype(np.float64)
    else:
        idx = np.arange(n_rows, dtype=np.int64)
        w = np.ones(n_rows, dtype=np.float64)
    return _grow_tree(indptr, indices, data, n_features, y_f, idx, w,
                      max_features_n, max_depth, min_samples_split, rng)


class RandomForest(BaseEstimator, ClassifierMixin):
    """Bagged CART ensemble for binary labels on count features.

    Prediction is a majority vote of the trees; an exact tie goes to
    label 0.  With the same seed the fitted model is identical no matter
    how many jobs fit it.
    """

    def __init__(self, n_trees: int = 100, criterion: str = "gini",
                 max_features="sqrt", bootstrap: bool = True,
                 max_depth=None, min_samples_split: int = 2,
                 seed: int = 0, n_jobs: int = 1):
        self.n_trees = n_trees
        self.criterion = criterion
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.seed = seed
        self.n_jobs = n_jobs

    def _validate_params(self):
        if not isinstance(self.n_trees, int) or self.n_trees < 1:
            raise ConfigError(f"n_trees must be a positive integer, got {self.n_trees!r}")
        if self.criterion != "gini":
            raise ConfigError(f"unsupported criterion {self.criterion!r}")
        if not isinstance(self.min_samples_split, int) or self.min_samples_split < 2:
            raise ConfigError(
                f"min_samples_split must be an integer >= 2, got {self.min_samples_split!r}")
        if self.max_depth is not None and (
                not isinstance(self.max_depth, int) or self.max_depth < 1):
            raise ConfigError(f"max_depth must be None or a positive integer, got {self.max_depth!r}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")

    def _resolve_max_features(self, n_features: int) -> int:
        if n_features == 0:
            return 0
        if self.max_features == "sqrt":
            return max(1, math.isqrt(n_features))
        if self.max_features is None:
            return n_features
        if isinstance(self.max_features, int) and self.max_features >= 1:
            return min(self.max_features, n_features)
        raise ConfigError(f"max_features must be 'sqrt', None, or a positive int, "
                          f"got {self.max_features!r}")

    def fit(self, X, y):
        self._validate_params()
        X = sp.csr_matrix(X) if sp.issparse(X) else sp.csr_matrix(np.asarray(X, dtype=np.float64))
        y = np.asarray(y, dtype=np.int64)
        if X.shape[0] != y.shape[0]:
            raise ShapeMismatchError(f"{X.shape[0]} rows vs {y.shape[0]} labels")
        if X.shape[0] < 2:
            raise TooFewRowsError(f"need at least 2 rows, got {X.shape[0]}")
        if not np.isin(y, (0, 1)).all():
            raise ConfigError("labels must be binary 0/1")
        present = np.unique(y)
        if present.shape[0] < 2:
            raise OneClassTrainingError(f"training labels are all {int(present[0])}")
        csc = X.tocsc()
        csc.sort_indices()
        indptr = csc.indptr.astype(np.int64)
        indices = csc.indices.astype(np.int64)
        data = csc.data.astype(np.float64)
        y_f = y.astype(np.float64)
        m = self._resolve_max_features(X.shape[1])
        jobs = self.n_jobs if self.n_jobs else 1
        self.trees_ = Parallel(n_jobs=jobs)(
            delayed(_fit_one_tree)(
                t, self.seed, indptr, indices, data, X.shape[0], X.shape[1],
                y_f, self.bootstrap, m, self.max_depth, self.min_samples_split)
            for t in range(self.n_trees)
        )
        self.n_features_in_ = X.shape[1]
        self.classes_ = np.array([0, 1], dtype=np.int64)
        return self

    def predict(self, X) -> np.ndarray:
        if not hasattr(self, "trees_"):
            raise ModelError("forest is not fitted")
        X = sp.csr_matrix(X) if sp.issparse(X) else sp.csr_matrix(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features_in_:
            raise ShapeMismatchError(
                f"X has {X.shape[1]} features, model was trained on {self.n_features_in_}")
        X.sort_indices()
        votes = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees_:
            votes += tree.predict_rows(X)
        return (votes * 2 > len(self.trees_)).astype(np.int64)

    def to_dict(self) -> dict:
        if not hasattr(self, "trees_"):
            raise ModelError("forest is not fitted")
        return {
            "n_trees": self.n_trees,
            "criterion": self.criterion,
            "max_features": self.max_features,
            "bootstrap": self.bootstrap,
            "max_depth": self.max_depth,
            "min_samples_split": self.min_samples_split,
            "seed": self.seed,
            "n_features": int(self.n_features_in_),
            "trees": [tree.to_nested() for tree in self.trees_],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "RandomForest":
        try:
            est = cls(
                n_trees=payload["n_trees"],
                criterion=payload["criterion"],
                max_features=payload["max_features"],
                bootstrap=payload["bootstrap"],
                max_depth=payload["max_depth"],
                min_samples_split=payload["min_samples_split"],
                seed=payload["seed"],
            )
            est.trees_ = [DecisionTree.from_nested(node) for node in payload["trees"]]
            est.n_features_in_ = int(payload["n_features"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ModelError(f"malformed forest payload: {exc}") from None
        est.classes_ = np.array([0, 1], dtype=np.int64)
        if len(est.trees_) != est.n_trees:
            raise ModelError(
                f"payload declares {est.n_trees} trees but carries {len(est.trees_)}")
        return est
