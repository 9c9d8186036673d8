"""Gradient-boosted regression trees with second-order leaf weights.

Squared loss, so the gradient is the residual and the hessian is 1 per row. Splits are searched on
a per-feature histogram of at most `max_bins` bins and a row goes left when `x <= threshold`.
Trees grow best-first up to `num_leaves` leaves and `max_depth` levels.
Features are standardized inside `fit_gbt` and the scaler travels with the ensemble; missing
values are imputed with the training means, which is 0 after standardization.
"""
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from socialmuse.features.context import FEATURE_NAMES, ScalerParams, standardize
from socialmuse.utils.errors import InvalidInput

LEAF = -1


@dataclass(frozen=True)
class GBTParams:
    n_estimators: int = 100
    """number of boosting rounds"""
    learning_rate: float = 0.1
    """shrinkage applied to every tree output"""
    max_depth: int = 5
    """maximum depth of a tree (root has depth 0)"""
    subsample: float = 1.0
    """fraction of rows sampled without replacement per tree"""
    colsample_bytree: float = 1.0
    """fraction of candidate features sampled per tree"""
    num_leaves: int = 31
    """maximum number of leaves per tree"""
    reg_lambda: float = 1.0
    """L2 penalty on leaf weights"""
    gamma: float = 0.0
    """minimum gain for a split"""
    min_child_weight: float = 1.0
    """minimum hessian sum in a child"""
    max_bins: int = 64
    """maximum number of histogram bins per feature"""
    seed: int = 0
    """seed for row and column subsampling"""

    def with_grid_point(self, point: Dict[str, float]) -> "GBTParams":
        merged = asdict(self)
        merged.update(point)
        return GBTParams(**merged)


@dataclass(frozen=True, eq=False)
class Tree:
    """Node arrays; leaves have children -1 and feature -1."""

    children_left: np.ndarray
    children_right: np.ndarray
    features: np.ndarray
    thresholds: np.ndarray
    values: np.ndarray
    node_sample_weight: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.values)

    def predict(self, Z: np.ndarray) -> np.ndarray:
        """Leaf values for standardized rows."""
        node = np.zeros(Z.shape[0], dtype=np.int64)
        rows = np.arange(Z.shape[0])
        internal = self.children_left[node] != LEAF
        while internal.any():
            feature = self.features[node]
            go_left = Z[rows, np.where(internal, feature, 0)] <= self.thresholds[node]
            nxt = np.where(go_left, self.children_left[node], self.children_right[node])
            node = np.where(internal, nxt, node)
            internal = self.children_left[node] != LEAF
        return self.values[node]


@dataclass(frozen=True, eq=False)
class TreeEnsemble:
    trees: Tuple[Tree, ...]
    learning_rate: float
    base_score: float
    scaler: ScalerParams
    selected: np.ndarray
    """boolean mask over the feature columns"""
    feature_names: Tuple[str, ...] = FEATURE_NAMES
    metadata: Dict = field(default_factory=dict)

    @property
    def n_features(self) -> int:
        return len(self.scaler.mean)

    def predict_raw(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        Z = standardize(X, self.scaler)
        out = np.full(X.shape[0], self.base_score)
        for tree in self.trees:
            out += self.learning_rate * tree.predict(Z)
        return out


def predict(ensemble: TreeEnsemble, vec: np.ndarray) -> float:
    """Prediction clamped at 0 for reporting; use `predict_raw` for ranking."""
    return max(0.0, float(ensemble.predict_raw(vec)[0]))


def _bin_edges(column: np.ndarray, max_bins: int) -> np.ndarray:
    values = np.unique(column)
    if len(values) <= max_bins:
        return (values[:-1] + values[1:]) / 2.0
    cuts = np.quantile(column, np.linspace(0, 1, max_bins + 1)[1:-1])
    return np.unique(cuts)


class _Histograms:
    """Binned copy of the training matrix, with bins of all features laid out in one flat axis."""

    def __init__(self, Z: np.ndarray, max_bins: int):
        self.edges = [_bin_edges(Z[:, j], max_bins) for j in range(Z.shape[1])]
        sizes = np.array([len(e) + 1 for e in self.edges])
        self.offsets = np.concatenate([[0], np.cumsum(sizes)[:-1]])
        self.sizes = sizes
        self.total = int(sizes.sum())
        self.binned = np.stack(
            [np.searchsorted(self.edges[j], Z[:, j], side="left") + self.offsets[j] for j in range(Z.shape[1])],
            axis=1,
        )

    def build(self, rows: np.ndarray, cols: np.ndarray, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        flat = self.binned[np.ix_(rows, cols)].ravel()
        g = np.bincount(flat, weights=np.repeat(grad[rows], len(cols)), minlength=self.total)
        h = np.bincount(flat, minlength=self.total).astype(np.float64)
        return g, h


@dataclass
class _Node:
    rows: np.ndarray
    depth: int
    G: float
    H: float
    split: Optional[Tuple[float, int, int]] = None
    """(gain, feature, bin)"""


def _best_split(node: _Node, hist: _Histograms, cols: np.ndarray, grad: np.ndarray, params: GBTParams):
    g, h = hist.build(node.rows, cols, grad)
    lam = params.reg_lambda
    parent = node.G ** 2 / (node.H + lam)
    best = None
    for j in cols:
        n_bins = hist.sizes[j]
        if n_bins < 2:
            continue
        start = hist.offsets[j]
        GL = np.cumsum(g[start : start + n_bins])[:-1]
        HL = np.cumsum(h[start : start + n_bins])[:-1]
        GR = node.G - GL
        HR = node.H - HL
        gain = 0.5 * (GL ** 2 / (HL + lam) + GR ** 2 / (HR + lam) - parent) - params.gamma
        gain = np.where((HL >= params.min_child_weight) & (HR >= params.min_child_weight), gain, -np.inf)
        b = int(np.argmax(gain))
        if gain[b] > 0 and (best is None or gain[b] > best[0]):
            best = (float(gain[b]), int(j), b)
    return best


def _grow_tree(
    hist: _Histograms, grad: np.ndarray, rows: np.ndarray, cols: np.ndarray, params: GBTParams
) -> Tree:
    """One tree grown on the sampled rows and columns."""
    lam = params.reg_lambda
    nodes: List[_Node] = [_Node(rows, 0, float(grad[rows].sum()), float(len(rows)))]
    left = [LEAF]
    right = [LEAF]
    features = [LEAF]
    thresholds = [0.0]

    def consider(i: int) -> None:
        if nodes[i].depth < params.max_depth and len(nodes[i].rows) > 1:
            nodes[i].split = _best_split(nodes[i], hist, cols, grad, params)

    consider(0)
    n_leaves = 1
    while n_leaves < params.num_leaves:
        open_leaves = [i for i in range(len(nodes)) if left[i] == LEAF and nodes[i].split is not None]
        if not open_leaves:
            break
        i = max(open_leaves, key=lambda k: (nodes[k].split[0], -k))
        _, j, b = nodes[i].split
        node = nodes[i]
        go_left = hist.binned[node.rows, j] - hist.offsets[j] <= b
        for child_rows in (node.rows[go_left], node.rows[~go_left]):
            nodes.append(_Node(child_rows, node.depth + 1, float(grad[child_rows].sum()), float(len(child_rows))))
            left.append(LEAF)
            right.append(LEAF)
            features.append(LEAF)
            thresholds.append(0.0)
        left[i], right[i] = len(nodes) - 2, len(nodes) - 1
        features[i] = j
        thresholds[i] = float(hist.edges[j][b])
        node.split = None
        consider(left[i])
        consider(right[i])
        n_leaves += 1

    tree = Tree(
        children_left=np.asarray(left, dtype=np.int64),
        children_right=np.asarray(right, dtype=np.int64),
        features=np.asarray(features, dtype=np.int64),
        thresholds=np.asarray(thresholds, dtype=np.float64),
        values=np.asarray([-n.G / (n.H + lam) for n in nodes], dtype=np.float64),
        node_sample_weight=np.asarray([n.H for n in nodes], dtype=np.float64),
    )
    return tree


def fit_gbt(
    X: np.ndarray,
    y: np.ndarray,
    params: GBTParams = GBTParams(),
    selected: Optional[np.ndarray] = None,
    feature_names: Sequence[str] = FEATURE_NAMES,
) -> TreeEnsemble:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise InvalidInput("cannot fit on an empty training set")
    if X.shape[0] != y.shape[0]:
        raise InvalidInput(f"{X.shape[0]} rows but {y.shape[0]} targets")
    n, d = X.shape
    if selected is None:
        selected = np.ones(d, dtype=bool)
    selected = np.asarray(selected, dtype=bool)
    candidates = np.flatnonzero(selected)
    if len(candidates) == 0:
        raise InvalidInput("no feature selected")
    if len(feature_names) != d:
        feature_names = tuple(f"f{j}" for j in range(d))

    scaler = ScalerParams.fit(X)
    Z = standardize(X, scaler)
    hist = _Histograms(Z, params.max_bins)
    rng = np.random.default_rng(params.seed)

    base_score = float(y.mean())
    pred = np.full(n, base_score)
    trees = []
    loss_curve = [float(np.mean((y - pred) ** 2))]
    n_rows = max(1, int(round(params.subsample * n)))
    n_cols = max(1, int(round(params.colsample_bytree * len(candidates))))
    for _ in range(params.n_estimators):
        rows = np.arange(n) if n_rows == n else np.sort(rng.choice(n, n_rows, replace=False))
        cols = candidates if n_cols == len(candidates) else np.sort(rng.choice(candidates, n_cols, replace=False))
        grad = pred - y
        tree = _grow_tree(hist, grad, rows, cols, params)
        trees.append(tree)
        pred = pred + params.learning_rate * tree.predict(Z)
        loss_curve.append(float(np.mean((y - pred) ** 2)))

    metadata = dict(params=asdict(params), loss_curve=loss_curve, n_train=n)
    return TreeEnsemble(
        trees=tuple(trees),
        learning_rate=params.learning_rate,
        base_score=base_score,
        scaler=scaler,
        selected=selected,
        feature_names=tuple(feature_names),
        metadata=metadata,
    )
