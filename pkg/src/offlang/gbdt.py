"""Gradient-boosted decision trees with logistic loss (the baseline learner).

Second-order boosting: per round g_i = p_i - y_i, h_i = p_i (1 - p_i), exact
greedy split search maximizing

    gain = 1/2 [ G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - G^2/(H+lambda) ]

with leaf weight -G/(H+lambda) and predictions advanced by eta * weight.
Sparse columns are scanned value-sorted with missing entries treated as an
implicit zero group; the scan itself lives in ``offlang._kernels`` (compiled
when available, NumPy otherwise).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import best_split_node
from .features import FeatureMatrix


class GbdtError(ValueError):
    pass


# Gains this small are float rounding noise (exact arithmetic gives 0 on a
# homogeneous node); splitting on them wastes nodes and makes tie-breaking
# depend on summation order.
MIN_SPLIT_GAIN = 1e-10


@dataclass(frozen=True)
class GbdtParams:
    n_rounds: int = 100
    max_depth: int = 4
    learning_rate: float = 0.1
    l2_leaf_reg: float = 1.0
    min_child_weight: float = 1.0

    def __post_init__(self):
        if self.n_rounds < 1:
            raise GbdtError("n_rounds must be >= 1")
        if self.max_depth < 1:
            raise GbdtError("max_depth must be >= 1")
        if not (0.0 < self.learning_rate <= 1.0):
            raise GbdtError("learning_rate must lie in (0, 1]")
        if self.l2_leaf_reg < 0.0:
            raise GbdtError("l2_leaf_reg must be >= 0")


@dataclass
class Tree:
    """Flat binary tree: node i is a leaf iff feature[i] < 0; routing goes
    left when x[feature] < threshold (implicit zeros route like value 0)."""

    feature: np.ndarray  # int32, -1 for leaves
    threshold: np.ndarray  # float64
    left: np.ndarray  # int32
    right: np.ndarray  # int32
    value: np.ndarray  # float64 leaf weight (unscaled)

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass
class GbdtModel:
    base_score: float
    learning_rate: float
    n_cols: int
    trees: list[Tree] = field(default_factory=list)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def log_loss(margins: np.ndarray, y: np.ndarray) -> float:
    # numerically stable: log(1+e^{-m}) via logaddexp
    return float(np.mean(y * np.logaddexp(0.0, -margins) + (1.0 - y) * np.logaddexp(0.0, margins)))


class _TreeBuilder:
    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []

    def add(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def done(self) -> Tree:
        return Tree(
            np.array(self.feature, dtype=np.int32),
            np.array(self.threshold, dtype=np.float64),
            np.array(self.left, dtype=np.int32),
            np.array(self.right, dtype=np.int32),
            np.array(self.value, dtype=np.float64),
        )


def build_tree(
    csc: tuple[np.ndarray, np.ndarray, np.ndarray],
    n_rows: int,
    g: np.ndarray,
    h: np.ndarray,
    params: GbdtParams,
) -> Tree:
    """Grow one regression tree on gradient/hessian statistics.

    ``csc`` holds (indptr, row_idx, vals) with entries value-sorted inside
    each column. Exposed separately from :func:`train_gbdt` so the
    closed-form single-node cases can be exercised directly.
    """
    indptr, rows, vals = csc
    lam = params.l2_leaf_reg
    builder = _TreeBuilder()
    root_rows = np.arange(n_rows, dtype=np.int64)
    root = builder.add()
    frontier = [(root, root_rows, 0)]
    while frontier:
        node, node_rows, depth = frontier.pop(0)
        g_node = float(g[node_rows].sum())
        h_node = float(h[node_rows].sum())
        denom = h_node + lam
        leaf_weight = -g_node / denom if denom > 0.0 else 0.0
        if depth >= params.max_depth or len(node_rows) < 2 or denom <= 0.0:
            builder.value[node] = leaf_weight
            continue
        in_node = np.zeros(n_rows, dtype=np.uint8)
        in_node[node_rows] = 1
        feat, gain, thr = best_split_node(
            indptr, rows, vals, in_node, g, h,
            g_node, h_node, len(node_rows), lam, params.min_child_weight,
        )
        if feat < 0 or gain <= MIN_SPLIT_GAIN:
            builder.value[node] = leaf_weight
            continue
        x_node = np.zeros(n_rows, dtype=np.float64)
        a, b = indptr[feat], indptr[feat + 1]
        x_node[rows[a:b]] = vals[a:b]
        go_left = x_node[node_rows] < thr
        left_rows = node_rows[go_left]
        right_rows = node_rows[~go_left]
        left = builder.add()
        right = builder.add()
        builder.feature[node] = feat
        builder.threshold[node] = thr
        builder.left[node] = left
        builder.right[node] = right
        frontier.append((left, left_rows, depth + 1))
        frontier.append((right, right_rows, depth + 1))
    return builder.done()


def _route_leaf_values(tree: Tree, x: FeatureMatrix, csc=None) -> np.ndarray:
    """Leaf weight reached by every row of ``x`` under ``tree``."""
    if tree.n_nodes and tree.feature.max() >= x.n_cols:
        raise GbdtError(
            "tree references feature %d but matrix has %d columns"
            % (int(tree.feature.max()), x.n_cols)
        )
    n = x.n_rows
    used = sorted(int(f) for f in np.unique(tree.feature) if f >= 0)
    if csc is None:
        csc = x.to_csc()
    indptr, rows, vals = csc
    dense_cols = {}
    for j in used:
        col = np.zeros(n, dtype=np.float64)
        a, b = indptr[j], indptr[j + 1]
        col[rows[a:b]] = vals[a:b]
        dense_cols[j] = col
    idx = np.zeros(n, dtype=np.int64)
    while True:
        pending = np.nonzero(tree.feature[idx] >= 0)[0]
        if len(pending) == 0:
            break
        feats = tree.feature[idx[pending]]
        thrs = tree.threshold[idx[pending]]
        xv = np.empty(len(pending), dtype=np.float64)
        for j in np.unique(feats):
            m = feats == j
            xv[m] = dense_cols[int(j)][pending[m]]
        nxt = np.where(xv < thrs, tree.left[idx[pending]], tree.right[idx[pending]])
        idx[pending] = nxt
    return tree.value[idx]


def train_gbdt(
    features: FeatureMatrix,
    labels,
    params: GbdtParams = GbdtParams(),
    progress=None,
) -> GbdtModel:
    """Boost ``params.n_rounds`` trees on a sparse+dense feature matrix.

    ``progress(round_index, train_log_loss)`` is invoked after every round
    when given. Training log-loss is non-increasing round over round.
    """
    y = np.asarray(labels, dtype=np.float64)
    if features.n_rows != len(y):
        raise GbdtError("feature/label length mismatch")
    if features.n_rows < 2 or features.n_cols == 0 or len(features.vals) == 0:
        raise GbdtError("empty or degenerate feature matrix")
    n_pos = int(y.sum())
    if n_pos == 0 or n_pos == len(y):
        raise GbdtError("labels contain a single class; nothing to boost")

    rate = n_pos / len(y)
    base_score = float(np.log(rate / (1.0 - rate)))
    model = GbdtModel(base_score, params.learning_rate, features.n_cols)

    indptr, rows, vals = features.to_csc()
    # value-presort within every column, once
    for j in range(features.n_cols):
        a, b = indptr[j], indptr[j + 1]
        if b - a > 1:
            order = np.argsort(vals[a:b], kind="stable")
            rows[a:b] = rows[a:b][order]
            vals[a:b] = vals[a:b][order]
    csc = (indptr, rows, vals)

    margins = np.full(features.n_rows, base_score, dtype=np.float64)
    for r in range(params.n_rounds):
        p = _sigmoid(margins)
        g = p - y
        h = p * (1.0 - p)
        tree = build_tree(csc, features.n_rows, g, h, params)
        model.trees.append(tree)
        margins += params.learning_rate * _route_leaf_values(tree, features, csc)
        if progress is not None:
            progress(r, log_loss(margins, y))
    return model


def predict_margin(model: GbdtModel, features: FeatureMatrix) -> np.ndarray:
    if features.n_cols != model.n_cols:
        raise GbdtError(
            "matrix has %d columns, model was trained on %d" % (features.n_cols, model.n_cols)
        )
    margins = np.full(features.n_rows, model.base_score, dtype=np.float64)
    csc = features.to_csc()
    for tree in model.trees:
        margins += model.learning_rate * _route_leaf_values(tree, features, csc)
    return margins


def predict_gbdt(model: GbdtModel, features: FeatureMatrix) -> np.ndarray:
    """Positive-class probability per row."""
    return _sigmoid(predict_margin(model, features))
