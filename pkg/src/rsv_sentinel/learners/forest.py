"""Random forest of CART trees on bootstrap resamples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..panel import N_CLASSES, FeatureSchema
from .tree import DecisionTree, TreeParams, _schema_for, grow_tree


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 500
    mtry: int = 3  # floor(sqrt(15))
    bootstrap: bool = True
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    seed: int = 0


@dataclass
class Forest:
    trees: list
    params: ForestParams
    schema: FeatureSchema
    oob_error: Optional[float] = None

    def predict_proba(self, X) -> np.ndarray:
        return forest_proba(self.trees, X)

    def importance_raw(self) -> np.ndarray:
        total = np.zeros(len(self.schema))
        for tree in self.trees:
            total += tree.importance_raw()
        return total


def forest_proba(trees, X) -> np.ndarray:
    """Unweighted mean of per-tree leaf probabilities.

    Summed with math.fsum so the result is exactly invariant to tree
    order (fsum is correctly rounded).
    """
    stacked = np.stack([tree.predict_proba(X) for tree in trees])
    t, n, k = stacked.shape
    out = np.empty((n, k))
    for i in range(n):
        for j in range(k):
            out[i, j] = math.fsum(stacked[:, i, j]) / t
    return out


def _tree_seeds(seed: int, n_trees: int):
    """Per-tree seed material; a prefix is stable under larger n_trees."""
    children = np.random.SeedSequence(seed).spawn(n_trees)
    return [(np.random.default_rng(c), int(c.generate_state(2)[1]))
            for c in children]


def fit_forest(X, y, params: ForestParams = ForestParams(),
               schema: Optional[FeatureSchema] = None) -> Forest:
    """Fit n_trees trees, each on its own seeded bootstrap resample with
    per-node mtry feature subsampling; OOB error estimated when
    bootstrapping."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n = X.shape[0]
    schema = _schema_for(schema, X.shape[1])
    tree_params = TreeParams(max_depth=params.max_depth,
                             min_samples_split=params.min_samples_split,
                             min_samples_leaf=params.min_samples_leaf)

    trees = []
    oob_sum = np.zeros((n, N_CLASSES))
    oob_votes = np.zeros(n, dtype=np.int64)
    for rng, kernel_seed in _tree_seeds(params.seed, params.n_trees):
        if params.bootstrap:
            sample = rng.integers(0, n, size=n)
        else:
            sample = np.arange(n, dtype=np.int64)
        tree = grow_tree(X, y, tree_params, mtry=params.mtry,
                         seed=kernel_seed, schema=schema,
                         sample_indices=sample)
        trees.append(tree)
        if params.bootstrap:
            out_of_bag = np.ones(n, dtype=bool)
            out_of_bag[sample] = False
            if out_of_bag.any():
                oob_sum[out_of_bag] += tree.predict_proba(X[out_of_bag])
                oob_votes[out_of_bag] += 1

    oob_error = None
    if params.bootstrap:
        covered = oob_votes > 0
        if covered.any():
            probs = oob_sum[covered] / oob_votes[covered, None]
            pred = severity_argmax(probs)
            oob_error = float(np.mean(pred != y[covered]))
    return Forest(trees, params, schema, oob_error)


def severity_argmax(probs: np.ndarray) -> np.ndarray:
    """Argmax over classes, exact ties resolved toward the most severe."""
    probs = np.atleast_2d(probs)
    reversed_pick = np.argmax(probs[:, ::-1], axis=1)
    return probs.shape[1] - 1 - reversed_pick
