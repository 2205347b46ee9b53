"""Train/test partitioning, binary metrics, trials, and the level cascade.

The positive class throughout is binary label 1.  Ratios with a zero
denominator are reported as absent (None), never coerced to a number.
"""

from __future__ import annotations

import statistics
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.base import BaseEstimator, clone

from .corpus import Corpus
from .encoding import label_corpus
from .exceptions import (
    ConfigError,
    LengthMismatchError,
    TooFewRowsError,
    UntrainedLevelError,
)
from .featurize import DialogueVectorizer
from .forest import RandomForest
from .hiersplit import DEFAULT_SPLIT_SPEC, SplitSpec, build_split_sets


def train_test_split(n_rows: int, ratio: float = 0.8, seed: int = 0,
                     stratify_labels=None) -> tuple[np.ndarray, np.ndarray]:
    """Index split: a seeded shuffle's first floor(ratio * n) rows train.

    Returns (train_idx, test_idx), each sorted ascending.  With
    ``stratify_labels`` the same rule is applied within every label group
    (floor(ratio * group size) of each group trains), so class proportions
    carry over up to rounding.  Either side ending up empty is an error.
    """
    if not (isinstance(ratio, float) and 0.0 < ratio < 1.0):
        raise ConfigError(f"ratio must be strictly between 0 and 1, got {ratio!r}")
    if n_rows < 2:
        raise TooFewRowsError(f"cannot split {n_rows} row(s) two ways")
    rng = np.random.default_rng(seed)
    if stratify_labels is None:
        perm = rng.permutation(n_rows)
        k = int(ratio * n_rows)
        train, test = perm[:k], perm[k:]
    else:
        labels = np.asarray(stratify_labels)
        if labels.shape[0] != n_rows:
            raise LengthMismatchError(
                f"{labels.shape[0]} stratify labels for {n_rows} rows")
        train_parts, test_parts = [], []
        for value in np.unique(labels):
            members = np.flatnonzero(labels == value)
            members = members[rng.permutation(members.shape[0])]
            k = int(ratio * members.shape[0])
            train_parts.append(members[:k])
            test_parts.append(members[k:])
        train = np.concatenate(train_parts)
        test = np.concatenate(test_parts)
    if train.shape[0] == 0 or test.shape[0] == 0:
        raise TooFewRowsError(
            f"ratio {ratio} leaves an empty side for {n_rows} rows")
    return np.sort(train).astype(np.int64), np.sort(test).astype(np.int64)


@dataclass(frozen=True)
class ConfusionMatrix:
    """Binary confusion counts; label 1 is the positive class."""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


def confusion_matrix(y_true, y_pred) -> ConfusionMatrix:
    """Count the four outcomes over aligned truth/prediction vectors."""
    t = np.asarray(y_true, dtype=np.int64)
    p = np.asarray(y_pred, dtype=np.int64)
    if t.shape[0] != p.shape[0]:
        raise LengthMismatchError(f"{t.shape[0]} truths vs {p.shape[0]} predictions")
    if t.shape[0] == 0:
        raise TooFewRowsError("cannot build a confusion matrix from zero rows")
    for arr, name in ((t, "y_true"), (p, "y_pred")):
        if not np.isin(arr, (0, 1)).all():
            raise ConfigError(f"{name} must contain only 0/1")
    return ConfusionMatrix(
        tp=int(((t == 1) & (p == 1)).sum()),
        fp=int(((t == 0) & (p == 1)).sum()),
        fn=int(((t == 1) & (p == 0)).sum()),
        tn=int(((t == 0) & (p == 0)).sum()),
    )


def _ratio(num: int, den: int) -> Optional[float]:
    return num / den if den else None


@dataclass(frozen=True)
class MetricsReport:
    """Scalar metrics of one confusion matrix.  Absent means undefined."""

    accuracy: float
    precision: Optional[float]
    sensitivity: Optional[float]
    specificity: Optional[float]
    npv: Optional[float]
    tp_fp_ratio: Optional[float]
    tp_fn_ratio: Optional[float]

    @classmethod
    def from_confusion(cls, cm: ConfusionMatrix) -> "MetricsReport":
        return cls(
            accuracy=(cm.tp + cm.tn) / cm.total,
            precision=_ratio(cm.tp, cm.tp + cm.fp),
            sensitivity=_ratio(cm.tp, cm.tp + cm.fn),
            specificity=_ratio(cm.tn, cm.tn + cm.fp),
            npv=_ratio(cm.tn, cm.tn + cm.fn),
            tp_fp_ratio=_ratio(cm.tp, cm.fp),
            tp_fn_ratio=_ratio(cm.tp, cm.fn),
        )

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "sensitivity": self.sensitivity,
            "specificity": self.specificity,
            "npv": self.npv,
            "tp_fp_ratio": self.tp_fp_ratio,
            "tp_fn_ratio": self.tp_fn_ratio,
        }


@dataclass
class LevelResult:
    """Outcome of training and scoring one cascade level once."""

    level: int
    seed: int
    n_train: int
    n_test: int
    confusion: ConfusionMatrix
    metrics: MetricsReport
    model: object = field(repr=False, default=None)
    training_accuracy: list[float] = field(default_factory=list)
    training_loss: list[float] = field(default_factory=list)

    def to_dict(self, include_curves: bool = True) -> dict:
        out = {
            "level": self.level,
            "seed": self.seed,
            "n_train": self.n_train,
            "n_test": self.n_test,
            "confusion": self.confusion.to_dict(),
            "metrics": self.metrics.to_dict(),
        }
        if include_curves and self.training_accuracy:
            out["training_accuracy"] = self.training_accuracy
            out["training_loss"] = self.training_loss
        return out


def evaluate_level(X_level, y_level, estimator: BaseEstimator, level: int = 1,
                   ratio: float = 0.8, seed: int = 0,
                   stratify: bool = False) -> LevelResult:
    """Hold-out evaluation of one level: split, fit a clone, score the rest.

    The seed drives both the split and (when the estimator has a ``seed``
    parameter) the model, so one integer pins the whole trial down.
    """
    y_level = np.asarray(y_level, dtype=np.int64)
    train_idx, test_idx = train_test_split(
        y_level.shape[0], ratio=ratio, seed=seed,
        stratify_labels=y_level if stratify else None)
    model = clone(estimator)
    if "seed" in model.get_params():
        model.set_params(seed=seed)
    X_level = sp.csr_matrix(X_level)
    model.fit(X_level[train_idx], y_level[train_idx])
    preds = model.predict(X_level[test_idx])
    cm = confusion_matrix(y_level[test_idx], preds)
    return LevelResult(
        level=level,
        seed=seed,
        n_train=int(train_idx.shape[0]),
        n_test=int(test_idx.shape[0]),
        confusion=cm,
        metrics=MetricsReport.from_confusion(cm),
        model=model,
        training_accuracy=list(getattr(model, "training_accuracy_", [])),
        training_loss=list(getattr(model, "training_loss_", [])),
    )


@dataclass
class TrialsSummary:
    """Several seeds of the same level: the best one and the spread."""

    results: list[LevelResult]
    best: LevelResult
    mean: dict[str, Optional[float]]
    sd: dict[str, Optional[float]]

    def to_dict(self) -> dict:
        return {
            "seeds": [r.seed for r in self.results],
            "best_seed": self.best.seed,
            "best": self.best.to_dict(include_curves=False),
            "mean": self.mean,
            "sd": self.sd,
            "per_seed": [r.to_dict(include_curves=False) for r in self.results],
        }


_SUMMARY_METRICS = ("accuracy", "precision", "sensitivity", "specificity")


def run_trials(X_level, y_level, estimator: BaseEstimator, seeds: Sequence[int],
               level: int = 1, ratio: float = 0.8,
               stratify: bool = False) -> TrialsSummary:
    """Repeat evaluate_level once per seed; best trial = highest accuracy,
    earliest seed on ties.  Mean/sd cover the seeds where a metric is
    defined (sample sd; 0.0 for a single trial)."""
    if not seeds:
        raise ConfigError("at least one seed is required")
    results = [
        evaluate_level(X_level, y_level, estimator, level=level, ratio=ratio,
                       seed=s, stratify=stratify)
        for s in seeds
    ]
    best = max(results, key=lambda r: r.metrics.accuracy)
    mean: dict[str, Optional[float]] = {}
    sd: dict[str, Optional[float]] = {}
    for name in _SUMMARY_METRICS:
        values = [getattr(r.metrics, name) for r in results]
        values = [v for v in values if v is not None]
        if not values:
            mean[name] = None
            sd[name] = None
            continue
        mean[name] = statistics.fmean(values)
        sd[name] = statistics.stdev(values) if len(values) > 1 else 0.0
    return TrialsSummary(results=results, best=best, mean=mean, sd=sd)


class CascadeClassifier(BaseEstimator):
    """Chain of binary levels: the first level that claims a dialogue
    (predicts 0) is its leaf; surviving every level means the residual leaf.

    fit() takes a labeled corpus and trains one clone of the estimator
    prototype per level on that level's rows.  Leaf indices are 0-based
    (level k claims leaf k); the residual leaf is ``n_levels``.
    """

    def __init__(self, estimator=None, split_spec=None, vectorizer=None):
        self.estimator = estimator
        self.split_spec = split_spec
        self.vectorizer = vectorizer

    def _resolved_spec(self) -> SplitSpec:
        if self.split_spec is None:
            return DEFAULT_SPLIT_SPEC
        if isinstance(self.split_spec, SplitSpec):
            return self.split_spec
        return SplitSpec.from_lists(self.split_spec)

    def fit(self, corpus: Corpus, y=None):
        spec = self._resolved_spec()
        vectorizer = clone(self.vectorizer) if self.vectorizer is not None else DialogueVectorizer()
        vectorizer.fit(corpus)
        X = vectorizer.transform(corpus)
        labeled = label_corpus(corpus)
        splits = build_split_sets(labeled, spec)
        prototype = self.estimator if self.estimator is not None else RandomForest()
        models = []
        for s in splits:
            model = clone(prototype)
            model.fit(X[s.row_ids], s.labels)
            models.append(model)
        self.spec_ = spec
        self.vectorizer_ = vectorizer
        self.models_ = models
        return self

    @classmethod
    def from_parts(cls, split_spec: SplitSpec, models: Sequence, vectorizer) -> "CascadeClassifier":
        """Assemble a ready cascade from already-fitted pieces."""
        spec = split_spec if isinstance(split_spec, SplitSpec) else SplitSpec.from_lists(split_spec)
        if len(models) != spec.n_levels:
            raise ConfigError(
                f"spec has {spec.n_levels} levels but {len(models)} models were given")
        cascade = cls()
        cascade.spec_ = spec
        cascade.models_ = list(models)
        cascade.vectorizer_ = vectorizer
        return cascade

    def _check_ready(self):
        if not hasattr(self, "models_"):
            raise UntrainedLevelError("cascade has no trained levels")
        for k, model in enumerate(self.models_, 1):
            if not (hasattr(model, "trees_") or hasattr(model, "weights_")):
                raise UntrainedLevelError(f"level {k} model is not fitted")

    def predict(self, X) -> np.ndarray:
        """Leaf index per feature row."""
        self._check_ready()
        X = sp.csr_matrix(X)
        n = X.shape[0]
        leaves = np.full(n, self.spec_.n_levels, dtype=np.int64)
        active = np.arange(n, dtype=np.int64)
        for k, model in enumerate(self.models_):
            if active.shape[0] == 0:
                break
            preds = model.predict(X[active])
            leaves[active[preds == 0]] = k
            active = active[preds == 1]
        return leaves

    def predict_dialogues(self, dialogues) -> np.ndarray:
        """Leaf index per dialogue (vectorizes first)."""
        self._check_ready()
        if self.vectorizer_ is None:
            raise UntrainedLevelError("cascade has no vectorizer")
        return self.predict(self.vectorizer_.transform(dialogues))


def cascade_predict(dialogue, cascade: CascadeClassifier) -> int:
    """Leaf index one dialogue (or raw text) lands in."""
    return int(cascade.predict_dialogues([dialogue])[0])


def format_score_table(scores: dict[str, dict[int, MetricsReport]]) -> str:
    """Plain-text grid: one block of rows per learner (accuracy, precision,
    specificity, sensitivity), one column per level.

    ``scores`` maps learner name -> {level -> MetricsReport}.
    """
    levels = sorted({lvl for per in scores.values() for lvl in per})
    header = ["learner", "metric"] + [f"M{lvl}" for lvl in levels]
    rows = [header]
    metric_rows = (
        ("A", "accuracy"),
        ("P", "precision"),
        ("S", "specificity"),
        ("Sens", "sensitivity"),
    )
    for learner in sorted(scores):
        per = scores[learner]
        for short, attr in metric_rows:
            row = [learner, short]
            for lvl in levels:
                report = per.get(lvl)
                value = getattr(report, attr, None) if report else None
                row.append("-" if value is None else f"{value:.3f}")
            rows.append(row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)).rstrip()
             for row in rows]
    return "\n".join(lines) + "\n"
