"""Model evaluation: confusion matrix, precision/recall/F-1, one-vs-rest
ROC/AUC, stratified k-fold cross-validation with hyperparameter grids, and
the side-by-side model comparison table."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ClassTooSmall,
    LengthMismatch,
    SingleClassLabels,
    TestSetMismatch,
)
from .learners import (
    BoostingParams,
    ForestParams,
    ImportanceRanking,
    TreeParams,
    fit_boosting,
    fit_forest,
    grow_tree,
    prune_tree,
    severity_argmax,
    variable_importance,
)
from .panel import N_CLASSES, RiskClass


@dataclass
class ConfusionMatrix:
    """counts[i][j] = observations with true class i predicted as class j,
    in LowRisk/Alert/Epidemic order."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        return float(np.trace(self.counts)) / self.total

    def to_lists(self) -> list:
        return self.counts.astype(int).tolist()


def confusion(truth: Sequence, pred: Sequence) -> ConfusionMatrix:
    if len(truth) != len(pred):
        raise LengthMismatch(f"{len(truth)} truths vs {len(pred)} predictions")
    if len(truth) == 0:
        raise LengthMismatch("need at least one pair")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(truth, pred):
        counts[int(t), int(p)] += 1
    return ConfusionMatrix(counts)


def prf1(matrix: ConfusionMatrix, cls) -> dict:
    """One-vs-rest precision, recall, and F-1 for one class.

    Degenerate denominators follow the zero conventions: precision=0 when
    TP+FP=0, recall=0 when TP+FN=0, f1=0 when precision+recall=0.
    """
    k = int(cls)
    tp = float(matrix.counts[k, k])
    fp = float(matrix.counts[:, k].sum() - matrix.counts[k, k])
    fn = float(matrix.counts[k, :].sum() - matrix.counts[k, k])
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = (2.0 * precision * recall / (precision + recall)
          if precision + recall > 0 else 0.0)
    return {"precision": precision, "recall": recall, "f1": f1}


def macro_f1(matrix: ConfusionMatrix) -> float:
    """Unweighted mean of the three per-class F-1 scores."""
    return float(np.mean([prf1(matrix, k)["f1"] for k in range(N_CLASSES)]))


# -- ROC ------------------------------------------------------------------------

@dataclass
class RocCurve:
    points: list   # (fpr, tpr) from (0,0) to (1,1), both non-decreasing
    auc: float
    positive_class: RiskClass


def roc_auc(scores: Sequence[float], labels: Sequence[int],
            positive_class) -> RocCurve:
    """ROC by threshold sweep over the distinct scores; AUC by trapezoid.

    `labels` are binary indicators for the positive class; `scores` are the
    model's probability for it. Tied scores move the curve diagonally, so
    the trapezoid AUC equals the Mann-Whitney statistic with ties counted
    as one half.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape != labels.shape:
        raise LengthMismatch(f"{scores.shape} vs {labels.shape}")
    n_pos = int(labels.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassLabels("need both positive and negative labels")

    order = np.argsort(-scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    points = [(0.0, 0.0)]
    tp = fp = 0
    for i in range(len(sorted_scores)):
        tp += int(sorted_labels[i])
        fp += 1 - int(sorted_labels[i])
        last = i + 1 == len(sorted_scores)
        if last or sorted_scores[i + 1] != sorted_scores[i]:
            points.append((fp / n_neg, tp / n_pos))

    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return RocCurve(points, auc, RiskClass(int(positive_class)))


def one_vs_rest_rocs(probs: np.ndarray, y: Sequence[int]) -> list[RocCurve]:
    y = np.asarray(y, dtype=np.int64)
    return [roc_auc(probs[:, k], (y == k).astype(np.int64), k)
            for k in range(N_CLASSES)]


# -- stratified folds --------------------------------------------------------------

def kfold_stratified(y: Sequence[int], k: int, seed: int) -> list[np.ndarray]:
    """k disjoint folds with sizes differing by at most one, per-class
    counts per fold differing by at most one; seeded and deterministic."""
    y = np.asarray(y, dtype=np.int64)
    if k < 2:
        raise ValueError("k must be at least 2")
    for cls in range(N_CLASSES):
        n_cls = int((y == cls).sum())
        if 0 < n_cls < k:
            raise ClassTooSmall(
                f"class {RiskClass(cls).label} has {n_cls} rows < k={k}")

    rng = np.random.default_rng(seed)
    folds = [[] for _ in range(k)]
    cursor = 0  # rotates so per-class remainders spread across folds
    for cls in range(N_CLASSES):
        idx = np.flatnonzero(y == cls)
        if len(idx) == 0:
            continue
        rng.shuffle(idx)
        base, extra = divmod(len(idx), k)
        sizes = [base + (1 if (j - cursor) % k < extra else 0)
                 for j in range(k)]
        cursor = (cursor + extra) % k
        start = 0
        for j, size in enumerate(sizes):
            folds[j].extend(idx[start:start + size].tolist())
            start += size
    return [np.array(sorted(fold), dtype=np.int64) for fold in folds]


# -- cross-validated grid search ------------------------------------------------------

@dataclass
class CvResult:
    best_params: dict
    table: list      # one {params, mean_accuracy} row per grid point
    model: object    # refit on the full training set with best_params


def _grid_points(grid: dict) -> list[dict]:
    if not grid:
        raise ValueError("empty parameter grid")
    keys = sorted(grid)
    return [dict(zip(keys, combo))
            for combo in itertools.product(*(grid[k] for k in keys))]


# Simplicity keys for tie-breaking: fewer trees/stages first, then, for
# CART, larger cp (a stronger prune is the simpler tree).
_SIMPLICITY = {
    "cart": lambda p: (-p.get("complexity_parameter", 0.0),
                       p.get("max_depth") or 0),
    "forest": lambda p: (p.get("n_trees", 0), p.get("mtry", 0)),
    "boosting": lambda p: (p.get("n_stages", 0), p.get("max_depth", 0),
                           p.get("learning_rate", 0.0)),
}

DEFAULT_GRIDS = {
    "cart": {"complexity_parameter": [0.001, 0.005, 0.01, 0.05]},
    "forest": {"mtry": [2, 3, 5], "n_trees": [300, 500]},
    "boosting": {"learning_rate": [0.05, 0.1], "n_stages": [100, 200],
                 "max_depth": [2, 3]},
}

# Growth settings for the CART pipeline (rpart-like stopping rules).
CART_GROWTH = TreeParams(max_depth=30, min_samples_split=20,
                         min_samples_leaf=7)


def fit_model(kind: str, params: dict, X, y, seed: int, schema=None):
    """Train one model of the given kind with a flat params dict."""
    if kind == "cart":
        grown = grow_tree(X, y, CART_GROWTH, schema=schema)
        return prune_tree(grown, params.get("complexity_parameter", 0.0))
    if kind == "forest":
        return fit_forest(X, y, ForestParams(seed=seed, **params),
                          schema=schema)
    if kind == "boosting":
        return fit_boosting(X, y, BoostingParams(seed=seed, **params),
                            schema=schema)
    raise ValueError(f"unknown learner kind {kind!r}")


def _fold_accuracy(probs: np.ndarray, y_val: np.ndarray) -> float:
    return float(np.mean(severity_argmax(probs) == y_val))


def _cv_accuracies(kind: str, points: list[dict], X, y, folds, seed: int,
                   schema) -> dict:
    """Mean validation accuracy per grid point.

    Nested structure is exploited: one grown CART serves every cp; a
    forest's first t trees are the t-tree forest; a boosting prefix is the
    shorter fit. Grid points collapse onto shared "structural" fits.
    """
    sums = {i: 0.0 for i in range(len(points))}
    for fold in folds:
        val_mask = np.zeros(len(y), dtype=bool)
        val_mask[fold] = True
        X_tr, y_tr = X[~val_mask], y[~val_mask]
        X_val, y_val = X[val_mask], y[val_mask]

        if kind == "cart":
            grown = grow_tree(X_tr, y_tr, CART_GROWTH, schema=schema)
            for i, p in enumerate(points):
                pruned = prune_tree(grown, p.get("complexity_parameter", 0.0))
                sums[i] += _fold_accuracy(pruned.predict_proba(X_val), y_val)
        elif kind == "forest":
            by_structure: dict = {}
            for i, p in enumerate(points):
                key = tuple((k, v) for k, v in sorted(p.items())
                            if k != "n_trees")
                by_structure.setdefault(key, []).append(i)
            for key, members in by_structure.items():
                base = dict(key)
                max_trees = max(points[i].get("n_trees", 500)
                                for i in members)
                forest = fit_forest(
                    X_tr, y_tr,
                    ForestParams(seed=seed, n_trees=max_trees, **base),
                    schema=schema)
                per_tree = np.stack([t.predict_proba(X_val)
                                     for t in forest.trees])
                cumulative = np.cumsum(per_tree, axis=0)
                for i in members:
                    t = points[i].get("n_trees", 500)
                    sums[i] += _fold_accuracy(cumulative[t - 1] / t, y_val)
        elif kind == "boosting":
            by_structure = {}
            for i, p in enumerate(points):
                key = tuple((k, v) for k, v in sorted(p.items())
                            if k != "n_stages")
                by_structure.setdefault(key, []).append(i)
            for key, members in by_structure.items():
                base = dict(key)
                max_stages = max(points[i].get("n_stages", 200)
                                 for i in members)
                model = fit_boosting(
                    X_tr, y_tr,
                    BoostingParams(seed=seed, n_stages=max_stages, **base),
                    schema=schema)
                for i in members:
                    m = points[i].get("n_stages", 200)
                    probs = model.predict_proba(X_val, through_stage=m)
                    sums[i] += _fold_accuracy(probs, y_val)
        else:
            raise ValueError(f"unknown learner kind {kind!r}")
    return {i: s / len(folds) for i, s in sums.items()}


def cross_validate(kind: str, grid: dict, X, y, k: int = 10,
                   seed: int = 0, schema=None) -> CvResult:
    """Grid search by mean validation accuracy over stratified folds.

    Ties go to the simpler model; the returned model is refit on the full
    training set with the winning parameters.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    points = _grid_points(grid)
    folds = kfold_stratified(y, k, seed)
    accuracies = _cv_accuracies(kind, points, X, y, folds, seed, schema)

    simplicity = _SIMPLICITY[kind]
    ranked = sorted(range(len(points)),
                    key=lambda i: (-accuracies[i], simplicity(points[i])))
    best = points[ranked[0]]
    table = [{"params": points[i], "mean_accuracy": accuracies[i]}
             for i in range(len(points))]
    model = fit_model(kind, best, X, y, seed, schema)
    return CvResult(best_params=best, table=table, model=model)


# -- evaluation report ------------------------------------------------------------------

@dataclass
class EvaluationReport:
    model_id: str
    model_kind: str
    confusion: ConfusionMatrix
    accuracy: float
    per_class: list         # [{precision, recall, f1}] in class order
    macro_f1: float
    auc: list               # per-class one-vs-rest AUC in class order
    importance: ImportanceRanking
    test_set_id: str
    n_test: int
    roc_points: Optional[list] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "model_kind": self.model_kind,
            "confusion": self.confusion.to_lists(),
            "accuracy": self.accuracy,
            "per_class": self.per_class,
            "macro_f1": self.macro_f1,
            "auc": self.auc,
            "importance": self.importance.entries,
            "test_set_id": self.test_set_id,
            "n_test": self.n_test,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationReport":
        return cls(
            model_id=data["model_id"],
            model_kind=data["model_kind"],
            confusion=ConfusionMatrix(np.array(data["confusion"],
                                               dtype=np.int64)),
            accuracy=data["accuracy"],
            per_class=data["per_class"],
            macro_f1=data["macro_f1"],
            auc=data["auc"],
            importance=ImportanceRanking(
                [(n, v) for n, v in data["importance"]]),
            test_set_id=data["test_set_id"],
            n_test=data["n_test"],
        )


def test_set_fingerprint(X_test: np.ndarray, y_test: np.ndarray) -> str:
    import hashlib
    digest = hashlib.sha256()
    digest.update(np.ascontiguousarray(X_test, dtype=np.float64).tobytes())
    digest.update(np.ascontiguousarray(y_test, dtype=np.int64).tobytes())
    return digest.hexdigest()[:16]


def evaluate_model(model, model_kind: str, model_id: str,
                   X_test, y_test) -> EvaluationReport:
    X_test = np.ascontiguousarray(X_test, dtype=np.float64)
    y_test = np.ascontiguousarray(y_test, dtype=np.int64)
    probs = model.predict_proba(X_test)
    pred = severity_argmax(probs)
    matrix = confusion(y_test, pred)
    rocs = one_vs_rest_rocs(probs, y_test)
    return EvaluationReport(
        model_id=model_id,
        model_kind=model_kind,
        confusion=matrix,
        accuracy=matrix.accuracy(),
        per_class=[prf1(matrix, k) for k in range(N_CLASSES)],
        macro_f1=macro_f1(matrix),
        auc=[r.auc for r in rocs],
        importance=variable_importance(model),
        test_set_id=test_set_fingerprint(X_test, y_test),
        n_test=len(y_test),
        roc_points=[r.points for r in rocs],
    )


# -- comparison table ----------------------------------------------------------------------

def compare_models(reports: Sequence[EvaluationReport]) -> dict:
    """Metric-by-model table with per-metric winner flags.

    All reports must fingerprint the same test set.
    """
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    ids = {r.test_set_id for r in reports}
    if len(ids) > 1:
        raise TestSetMismatch(f"reports span test sets {sorted(ids)}")

    models = [r.model_kind for r in reports]
    rows = []

    def _metric_row(name, values):
        best = max(values)
        winners = [m for m, v in zip(models, values) if v == best]
        rows.append({"metric": name, "values": dict(zip(models, values)),
                     "winners": winners})

    _metric_row("accuracy", [r.accuracy for r in reports])
    _metric_row("macro_f1", [r.macro_f1 for r in reports])
    for k in range(N_CLASSES):
        _metric_row(f"auc_{RiskClass(k).label}",
                    [r.auc[k] for r in reports])
    rows.append({"metric": "top4_importance",
                 "values": {r.model_kind: r.importance.top(4)
                            for r in reports},
                 "winners": []})
    return {"models": models, "rows": rows,
            "test_set_id": reports[0].test_set_id}


def render_comparison(comparison: dict) -> str:
    """Plain-text table: metric rows by model columns."""
    models = comparison["models"]
    width = max(14, *(len(m) + 2 for m in models))
    header = "Metric".ljust(24) + "".join(m.ljust(width) for m in models)
    lines = [header, "-" * len(header)]
    for row in comparison["rows"]:
        if row["metric"] == "top4_importance":
            for i in range(4):
                label = "Top importance" if i == 0 else ""
                cells = [row["values"][m][i] for m in models]
                lines.append(label.ljust(24)
                             + "".join(c.ljust(width) for c in cells))
            continue
        cells = []
        for m in models:
            value = f"{row['values'][m]:.3f}"
            if m in row["winners"] and len(row["winners"]) < len(models):
                value += " *"
            cells.append(value)
        lines.append(row["metric"].ljust(24)
                     + "".join(c.ljust(width) for c in cells))
    lines.append("")
    lines.append("* best on that metric")
    return "\n".join(lines)
