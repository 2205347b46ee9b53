"""Reference implementations the tests compare the package against.

Everything here is deliberately naive and, where it matters, exact:
impurities are rational arithmetic, the split search enumerates every
threshold, the encoder uses bitwise OR rather than summed weights.  None
of it imports the code under test.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def encoded_value(labels) -> int:
    """Presence value by OR-ing one bit per class (class 0 = high bit)."""
    value = 0
    for e in labels:
        value |= 1 << (6 - e)
    return value


def gini_fraction(counts) -> Fraction:
    """Exact Gini impurity of a count vector."""
    total = sum(counts)
    if total == 0:
        raise ValueError("empty node")
    return 1 - sum(Fraction(int(c), total) ** 2 for c in counts)


def _weighted_child_gini(X, y, w, f, thr: Fraction) -> Fraction:
    left = [0, 0]
    right = [0, 0]
    for i in range(len(y)):
        if Fraction(int(X[i][f])) <= thr:
            left[y[i]] += w[i]
        else:
            right[y[i]] += w[i]
    total = sum(left) + sum(right)
    child = Fraction(0)
    if sum(left):
        child += sum(left) * gini_fraction(left)
    if sum(right):
        child += sum(right) * gini_fraction(right)
    return child / total


def split_decrease(X, y, w, f, thr) -> Fraction:
    """Exact impurity decrease achieved by one concrete (feature, threshold)."""
    X = [list(row) for row in np.asarray(X)]
    y = [int(v) for v in y]
    n = len(y)
    w = [1] * n if w is None else [int(v) for v in w]
    counts = [0, 0]
    for i in range(n):
        counts[y[i]] += w[i]
    return gini_fraction(counts) - _weighted_child_gini(X, y, w, f, Fraction(thr))


def brute_force_best_split(X, y, w=None, candidates=None):
    """Exhaustive exact split search.

    Returns (decrease, feature, threshold, n_optima): the impurity decrease
    achieved by the best split as a Fraction (0 when nothing helps, with
    feature=None), the first-best (lowest feature, lowest threshold)
    split, and how many (feature, threshold) pairs tie for the optimum.
    """
    X = [list(row) for row in np.asarray(X)]
    y = [int(v) for v in y]
    n = len(y)
    w = [1] * n if w is None else [int(v) for v in w]
    n_features = len(X[0]) if n else 0
    cands = list(range(n_features)) if candidates is None else sorted(candidates)

    counts = [0, 0]
    for i in range(n):
        counts[y[i]] += w[i]
    parent = gini_fraction(counts)

    options = []
    for f in cands:
        values = sorted({int(row[f]) for row in X})
        for a, b in zip(values, values[1:]):
            thr = Fraction(a + b, 2)
            options.append((_weighted_child_gini(X, y, w, f, thr), f, thr))
    if not options:
        return Fraction(0), None, None, 0
    best_child = min(option[0] for option in options)
    if best_child >= parent:
        return Fraction(0), None, None, 0
    winners = [(f, thr) for child, f, thr in options if child == best_child]
    f, thr = winners[0]
    return parent - best_child, f, thr, len(winners)


def mlp_forward_naive(weights, biases, row, output_activation="identity"):
    """Straight-line forward pass: nested loops, no linear algebra library."""
    import math

    h = [float(v) for v in row]
    last = len(weights) - 1
    for l, (W, b) in enumerate(zip(weights, biases)):
        out = []
        for j in range(len(b)):
            s = float(b[j])
            for i, hi in enumerate(h):
                s += hi * float(W[i][j])
            out.append(s)
        if l < last:
            h = [v if v > 0.0 else 0.0 for v in out]
        elif output_activation == "sigmoid":
            h = [1.0 / (1.0 + math.exp(-v)) for v in out]
        elif output_activation == "softmax":
            top = max(out)
            exps = [math.exp(v - top) for v in out]
            total = sum(exps)
            h = [e / total for e in exps]
        else:
            h = out
    return h


def numerical_gradients(model, X, y, h: float = 1e-6):
    """Central-difference gradients of the model's batch loss, per layer."""
    grads = []
    for l in range(len(model.weights_)):
        layer = []
        for arr in (model.weights_[l], model.biases_[l]):
            num = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                i = it.multi_index
                old = arr[i]
                arr[i] = old + h
                up = model.loss_on(X, y)
                arr[i] = old - h
                down = model.loss_on(X, y)
                arr[i] = old
                num[i] = (up - down) / (2.0 * h)
            layer.append(num)
        grads.append(tuple(layer))
    return grads


def max_relative_error(analytic, numeric) -> float:
    """Worst-case relative disagreement across all layers and parameters."""
    worst = 0.0
    for (da, ba), (dn, bn) in zip(analytic, numeric):
        for a, n in ((da, dn), (ba, bn)):
            denom = np.maximum(1e-8, np.abs(a) + np.abs(n))
            worst = max(worst, float((np.abs(a - n) / denom).max()))
    return worst
