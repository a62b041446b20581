"""Multinomial gradient boosting with shallow regression trees.

Class scores start at the training log-priors; each stage fits one
regression tree per class to the softmax residuals (one-hot minus
predicted probability) and adds its leaf values scaled by the learning
rate. Probabilities are the softmax of the accumulated scores.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..panel import N_CLASSES, FeatureSchema
from . import _kernels
from .tree import FlatTree, _schema_for

# Newton leaf steps explode when a leaf's probabilities saturate; the
# cap keeps single-stage moves bounded without touching ordinary fits.
LEAF_VALUE_CAP = 16.0
MIN_PRIOR = 1e-12


@dataclass(frozen=True)
class BoostingParams:
    n_stages: int = 200
    learning_rate: float = 0.1
    max_depth: int = 3
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    seed: int = 0  # recorded for provenance; the fit itself is deterministic

    def __post_init__(self):
        # 0 is allowed so the "zero shrinkage keeps the priors" identity
        # is expressible; ordinary fits use (0, 1].
        if not 0.0 <= self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in [0, 1]")
        if self.n_stages < 0:
            raise ValueError("n_stages must be non-negative")


@dataclass
class BoostedEnsemble:
    initial_scores: np.ndarray  # (K,) log-priors
    stages: list                # per stage: K regression FlatTrees
    params: BoostingParams
    schema: FeatureSchema

    @property
    def n_stages(self) -> int:
        return len(self.stages)

    def scores(self, X, through_stage: Optional[int] = None) -> np.ndarray:
        """Accumulated class scores after `through_stage` stages (all by
        default)."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        limit = self.n_stages if through_stage is None else through_stage
        F = np.tile(self.initial_scores, (X.shape[0], 1))
        for stage in self.stages[:limit]:
            for k, tree in enumerate(stage):
                leaf = _kernels.predict_leaf(tree.feature, tree.threshold,
                                             tree.left, tree.right, X)
                F[:, k] += self.params.learning_rate * tree.value[leaf]
        return F

    def predict_proba(self, X, through_stage: Optional[int] = None) -> np.ndarray:
        return softmax(self.scores(X, through_stage))

    def importance_raw(self) -> np.ndarray:
        total = np.zeros(len(self.schema))
        for stage in self.stages:
            for tree in stage:
                internal = tree.feature >= 0
                for f, g in zip(tree.feature[internal], tree.gain[internal]):
                    total[f] += g
        return total


def softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def log_loss(probs: np.ndarray, y: np.ndarray) -> float:
    p = np.clip(probs[np.arange(len(y)), y], 1e-15, 1.0)
    return float(-np.mean(np.log(p)))


def class_priors(y: np.ndarray) -> np.ndarray:
    counts = np.bincount(y, minlength=N_CLASSES).astype(np.float64)
    return counts / counts.sum()


def _fit_stage_tree(X, residual, order_all,
                    params: BoostingParams) -> FlatTree:
    curvature = np.abs(residual) * (1.0 - np.abs(residual))
    arrays = _kernels.grow_regression(
        X, residual, curvature, order_all,
        params.max_depth, params.min_samples_split, params.min_samples_leaf)
    feature, threshold, left, right, n_node, sum_r, sum_w, gain = arrays
    # Friedman's multiclass Newton step per leaf, with a saturation cap.
    value = np.zeros_like(sum_r)
    leaf_mask = feature < 0
    num = sum_r[leaf_mask]
    den = np.maximum(sum_w[leaf_mask], MIN_PRIOR)
    step = (N_CLASSES - 1) / N_CLASSES * num / den
    value[leaf_mask] = np.clip(step, -LEAF_VALUE_CAP, LEAF_VALUE_CAP)
    return FlatTree(feature=feature, threshold=threshold, left=left,
                    right=right, n_node=n_node, value=value, gain=gain)


def fit_boosting(X, y, params: BoostingParams = BoostingParams(),
                 schema: Optional[FeatureSchema] = None) -> BoostedEnsemble:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    schema = _schema_for(schema, X.shape[1])
    n = X.shape[0]

    initial = np.log(np.maximum(class_priors(y), MIN_PRIOR))
    one_hot = np.zeros((n, N_CLASSES))
    one_hot[np.arange(n), y] = 1.0

    # Every stage tree splits the same X: sort each feature once.
    order_all = np.ascontiguousarray(
        np.argsort(X, axis=0, kind="stable").T)

    F = np.tile(initial, (n, 1))
    stages = []
    for _ in range(params.n_stages):
        P = softmax(F)
        residual = one_hot - P
        stage = []
        for k in range(N_CLASSES):
            tree = _fit_stage_tree(X, np.ascontiguousarray(residual[:, k]),
                                   order_all, params)
            stage.append(tree)
            leaf = _kernels.predict_leaf(tree.feature, tree.threshold,
                                         tree.left, tree.right, X)
            F[:, k] += params.learning_rate * tree.value[leaf]
        stages.append(stage)
    return BoostedEnsemble(initial_scores=initial, stages=stages,
                           params=params, schema=schema)


def staged_log_loss(model: BoostedEnsemble, X, y) -> list[float]:
    """Training-curve utility: log-loss after 0..n_stages stages, each
    recomputed from the ensemble's own accumulated scores."""
    y = np.asarray(y, dtype=np.int64)
    return [log_loss(model.predict_proba(X, through_stage=m), y)
            for m in range(model.n_stages + 1)]
