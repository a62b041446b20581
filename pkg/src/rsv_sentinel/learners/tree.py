"""CART classification trees with Gini impurity and weakest-link pruning."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..errors import EmptyNode
from ..panel import N_CLASSES, FeatureSchema, default_schema
from . import _kernels

# Exact integer split comparison bounds the node size (see _kernels).
MAX_TRAIN_ROWS = 10_000
UNBOUNDED_DEPTH = 2**31


def gini(class_counts) -> float:
    """Gini impurity 1 - sum(p_k^2); in [0, 2/3] for three classes."""
    counts = np.asarray(class_counts, dtype=np.int64)
    total = int(counts.sum())
    if total <= 0:
        raise EmptyNode("impurity of an empty node")
    p = counts / total
    return float(1.0 - (p * p).sum())


@dataclass(frozen=True)
class TreeParams:
    max_depth: Optional[int] = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    complexity_parameter: float = 0.0

    def depth_limit(self) -> int:
        return UNBOUNDED_DEPTH if self.max_depth is None else self.max_depth


@dataclass
class FlatTree:
    """Array-of-nodes tree storage; node 0 is the root, -1 marks leaves."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    n_node: np.ndarray
    counts: Optional[np.ndarray] = None  # (nodes, K), classification
    value: Optional[np.ndarray] = None   # (nodes,), regression leaf values
    gain: Optional[np.ndarray] = None    # impurity decrease, sample units

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def is_leaf(self, node: int) -> bool:
        return self.feature[node] < 0

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    def features_used(self) -> set:
        return set(self.feature[self.feature >= 0].tolist())

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):  # children follow parents
            if not self.is_leaf(node):
                depths[self.left[node]] = depths[node] + 1
                depths[self.right[node]] = depths[node] + 1
        return int(depths.max())


class TreeNodeView:
    """Read-only node accessor: Internal(feature, threshold, left, right)
    or Leaf(class_counts, class_probs)."""

    def __init__(self, tree: FlatTree, node: int = 0):
        self._tree = tree
        self._node = node

    @property
    def is_leaf(self) -> bool:
        return self._tree.is_leaf(self._node)

    @property
    def feature_index(self) -> int:
        return int(self._tree.feature[self._node])

    @property
    def threshold(self) -> float:
        return float(self._tree.threshold[self._node])

    @property
    def left(self) -> "TreeNodeView":
        return TreeNodeView(self._tree, int(self._tree.left[self._node]))

    @property
    def right(self) -> "TreeNodeView":
        return TreeNodeView(self._tree, int(self._tree.right[self._node]))

    @property
    def n_samples(self) -> int:
        return int(self._tree.n_node[self._node])

    @property
    def class_counts(self) -> tuple:
        return tuple(int(c) for c in self._tree.counts[self._node])

    @property
    def class_probs(self) -> tuple:
        counts = self._tree.counts[self._node]
        return tuple((counts / counts.sum()).tolist())


@dataclass
class DecisionTree:
    """A grown (optionally pruned) classification tree."""

    tree: FlatTree
    schema: FeatureSchema
    params: TreeParams
    n_root: int
    root_impurity: float

    @property
    def root(self) -> TreeNodeView:
        return TreeNodeView(self.tree, 0)

    def predict_proba(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        leaf = _kernels.predict_leaf(self.tree.feature, self.tree.threshold,
                                     self.tree.left, self.tree.right, X)
        counts = self.tree.counts[leaf].astype(np.float64)
        return counts / counts.sum(axis=1, keepdims=True)

    def apply(self, X) -> np.ndarray:
        """Leaf id reached by each row (routing determinism contract)."""
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _kernels.predict_leaf(self.tree.feature, self.tree.threshold,
                                     self.tree.left, self.tree.right, X)

    def importance_raw(self) -> np.ndarray:
        """Per-feature total impurity decrease, as a share of root samples."""
        out = np.zeros(len(self.schema))
        internal = self.tree.feature >= 0
        for f, g in zip(self.tree.feature[internal],
                        self.tree.gain[internal]):
            out[f] += g / self.n_root
        return out


def generic_schema(p: int) -> FeatureSchema:
    """Positional schema for matrices that are not the 15-feature panel."""
    names = tuple(f"x{i}" for i in range(p))
    return FeatureSchema(names, {n: "" for n in names},
                         {n: False for n in names})


def _schema_for(schema: Optional[FeatureSchema], p: int) -> FeatureSchema:
    if schema is not None:
        if len(schema) != p:
            raise ValueError(
                f"schema names {len(schema)} features but X has {p}")
        return schema
    panel = default_schema()
    return panel if p == len(panel) else generic_schema(p)


def _validate_training(X, y):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValueError("X must be (n, p) with matching y of length n")
    if X.shape[0] == 0:
        raise ValueError("empty training set")
    if X.shape[0] > MAX_TRAIN_ROWS:
        raise ValueError(
            f"training sets above {MAX_TRAIN_ROWS} rows exceed the exact "
            "split-comparison bound")
    if not np.isfinite(X).all():
        raise ValueError("training features must be finite")
    if y.min() < 0 or y.max() >= N_CLASSES:
        raise ValueError(f"labels must lie in 0..{N_CLASSES - 1}")
    return X, y


def best_split(X, y, candidate_features: Optional[Sequence[int]] = None,
               min_samples_leaf: int = 1):
    """Exhaustive best split over the candidate features.

    Returns (feature_index, threshold, impurity_decrease) maximizing the
    weighted Gini decrease, with ties broken toward the lowest feature
    index then the lowest threshold; None when no split has a positive
    decrease or the leaf constraint cannot be met.
    """
    X, y = _validate_training(X, y)
    n, p = X.shape
    cols = np.arange(p) if candidate_features is None \
        else np.asarray(sorted(candidate_features), dtype=np.int64)
    sub = np.ascontiguousarray(X[:, cols])
    feature, threshold, left, right, n_node, counts, gain = \
        _kernels.grow_classification(
            sub, y, np.arange(n, dtype=np.int64), N_CLASSES,
            1, 2, min_samples_leaf, len(cols), 0)
    if feature[0] < 0:
        return None
    return int(cols[feature[0]]), float(threshold[0]), float(gain[0]) / n


def grow_tree(X, y, params: TreeParams = TreeParams(),
              mtry: Optional[int] = None, seed: int = 0,
              schema: Optional[FeatureSchema] = None,
              sample_indices: Optional[np.ndarray] = None) -> DecisionTree:
    """Recursive best-split growth until the stopping rules bind.

    `mtry` switches on per-node random feature subsampling (forest trees);
    None considers every feature (CART). `sample_indices` supplies a
    bootstrap multiset; by default the full training set is used.
    The returned tree is unpruned; apply `prune_tree` for a nonzero
    complexity parameter.
    """
    X, y = _validate_training(X, y)
    n, p = X.shape
    schema = _schema_for(schema, p)
    idx = np.arange(n, dtype=np.int64) if sample_indices is None \
        else np.ascontiguousarray(sample_indices, dtype=np.int64)
    effective_mtry = p if mtry is None else min(max(int(mtry), 1), p)

    arrays = _kernels.grow_classification(
        X, y, idx, N_CLASSES, params.depth_limit(),
        params.min_samples_split, params.min_samples_leaf,
        effective_mtry, seed)
    flat = FlatTree(feature=arrays[0], threshold=arrays[1], left=arrays[2],
                    right=arrays[3], n_node=arrays[4], counts=arrays[5],
                    gain=arrays[6])
    return DecisionTree(tree=flat, schema=schema, params=params,
                        n_root=len(idx),
                        root_impurity=gini(flat.counts[0]))


def _node_squared_counts(flat: FlatTree) -> list:
    return [sum(int(c) * int(c) for c in flat.counts[node])
            for node in range(flat.n_nodes)]


def prune_tree(tree: DecisionTree, complexity_parameter: float) -> DecisionTree:
    """Weakest-link pruning.

    Bottom-up, an internal node whose children have become leaves is
    collapsed when its impurity improvement (share-of-root-samples scale)
    is at most cp * root impurity. cp=0 keeps every grown split (growth
    only creates positive-gain splits); cp=1 collapses to a single leaf.
    The subtree sequence over increasing cp is nested.

    Improvements are compared as exact rationals built from the integer
    class counts, so the boundary cases (cp=0, cp=1) cannot drift on
    float rounding.
    """
    flat = tree.tree
    sq = _node_squared_counts(flat)
    m_root = int(tree.n_root)
    root_impurity_exact = 1 - Fraction(sq[0], m_root * m_root)
    threshold_gain = Fraction(complexity_parameter) * root_impurity_exact

    collapse = np.zeros(flat.n_nodes, dtype=bool)
    for node in range(flat.n_nodes - 1, -1, -1):  # children follow parents
        if flat.is_leaf(node):
            continue
        lc, rc = int(flat.left[node]), int(flat.right[node])
        left_leaf = flat.is_leaf(lc) or collapse[lc]
        right_leaf = flat.is_leaf(rc) or collapse[rc]
        nL, nR = int(flat.n_node[lc]), int(flat.n_node[rc])
        m = int(flat.n_node[node])
        improvement = (Fraction(sq[lc], nL) + Fraction(sq[rc], nR)
                       - Fraction(sq[node], m)) / m_root
        if left_leaf and right_leaf and improvement <= threshold_gain:
            collapse[node] = True

    keep = np.zeros(flat.n_nodes, dtype=bool)
    stack = [0]
    while stack:
        node = stack.pop()
        keep[node] = True
        if not flat.is_leaf(node) and not collapse[node]:
            stack.append(int(flat.right[node]))
            stack.append(int(flat.left[node]))

    remap = np.cumsum(keep) - 1
    kept = np.flatnonzero(keep)
    is_leaf_now = collapse[kept] | (flat.feature[kept] < 0)
    new = FlatTree(
        feature=np.where(is_leaf_now, -1, flat.feature[kept]),
        threshold=np.where(is_leaf_now, np.nan, flat.threshold[kept]),
        left=np.where(is_leaf_now, -1, remap[flat.left[kept]]),
        right=np.where(is_leaf_now, -1, remap[flat.right[kept]]),
        n_node=flat.n_node[kept],
        counts=flat.counts[kept],
        gain=np.where(is_leaf_now, 0.0, flat.gain[kept]),
    )
    return DecisionTree(
        tree=new, schema=tree.schema,
        params=replace(tree.params,
                       complexity_parameter=complexity_parameter),
        n_root=tree.n_root, root_impurity=tree.root_impurity)


def fit_cart(X, y, params: TreeParams = TreeParams(),
             schema: Optional[FeatureSchema] = None) -> DecisionTree:
    """Grow with all features, then prune at the params' cp."""
    grown = grow_tree(X, y, params, mtry=None, schema=schema)
    if params.complexity_parameter > 0.0:
        return prune_tree(grown, params.complexity_parameter)
    return grown
