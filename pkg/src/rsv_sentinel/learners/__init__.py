"""Tree learners: CART, random forest, and gradient boosting.

The module-level `predict_proba` / `predict_class` / `variable_importance`
accept any of the three trained model types.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..errors import NonFiniteFeature, SchemaMismatch
from ..panel import RiskClass
from .boosting import (
    BoostedEnsemble,
    BoostingParams,
    fit_boosting,
    log_loss,
    softmax,
    staged_log_loss,
)
from .forest import Forest, ForestParams, fit_forest, severity_argmax
from .tree import (
    DecisionTree,
    FlatTree,
    TreeNodeView,
    TreeParams,
    best_split,
    fit_cart,
    gini,
    grow_tree,
    prune_tree,
)

Model = Union[DecisionTree, Forest, BoostedEnsemble]


@dataclass
class ImportanceRanking:
    """(feature, importance) pairs sorted descending; importances sum to 1
    whenever any split exists, and unused features are exactly 0."""

    entries: list

    def top(self, k: int) -> list:
        return [name for name, _ in self.entries[:k]]

    def as_dict(self) -> dict:
        return dict(self.entries)


def _validate_features(model: Model, x) -> np.ndarray:
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != len(model.schema):
        raise SchemaMismatch(
            f"expected {len(model.schema)} features, got {X.shape[-1]}")
    if not np.isfinite(X).all():
        raise NonFiniteFeature("feature vector contains NaN or infinity")
    return np.ascontiguousarray(X), single


def predict_proba(model: Model, x) -> np.ndarray:
    """Class-probability vector(s) for one feature vector or a batch."""
    X, single = _validate_features(model, x)
    probs = model.predict_proba(X)
    return probs[0] if single else probs


def predict_class(model: Model, x):
    """Argmax class with exact ties broken toward the more severe class."""
    X, single = _validate_features(model, x)
    picked = severity_argmax(model.predict_proba(X))
    if single:
        return RiskClass(int(picked[0]))
    return [RiskClass(int(k)) for k in picked]


def variable_importance(model: Model) -> ImportanceRanking:
    """Total impurity decrease per feature over all splits, normalized."""
    raw = model.importance_raw()
    total = raw.sum()
    if total > 0.0:
        raw = raw / total
    names = model.schema.names
    order = sorted(range(len(names)), key=lambda i: (-raw[i], i))
    return ImportanceRanking([(names[i], float(raw[i])) for i in order])
