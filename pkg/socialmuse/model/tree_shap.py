"""Exact Shapley attributions for a TreeEnsemble, with conditional expectations taken along the tree
by cover (the path-dependent tree game).

Every leaf contributes a product game: for a coalition S the leaf is reached with weight
prod_f (o_f if f in S else z_f), where for each feature f on the leaf's path z_f is the product of
cover fractions and o_f says whether the row satisfies every condition on f. The Shapley value of
f in that game is value * (o_f - z_f) * integral_0^1 prod_{g != f} (z_g + (o_g - z_g) u) du, and the
integrand is a polynomial of degree below the path length, so Gauss-Legendre quadrature with
enough nodes is exact. All leaves of all trees are evaluated in one padded table.
"""
import weakref
from dataclasses import dataclass
from typing import Dict, List

import numpy as np
import scipy.sparse as sp

from socialmuse.features.context import standardize
from socialmuse.model.gbt import LEAF, TreeEnsemble

MAX_CHUNK_CELLS = 4_000_000


@dataclass(frozen=True, eq=False)
class AttributionVector:
    phi: np.ndarray
    base: float

    @property
    def prediction(self) -> float:
        return float(self.base + self.phi.sum())


@dataclass(frozen=True, eq=False)
class _LeafTable:
    values: np.ndarray
    """(L,) leaf value times learning rate"""
    path_features: np.ndarray
    """(L, M) feature tested at each path node, -1 padding"""
    path_thresholds: np.ndarray
    path_left: np.ndarray
    """(L, M) True when the path goes left at that node"""
    path_slots: np.ndarray
    """(L, M) slot of the node's feature in the leaf's unique feature list, D for padding"""
    slot_features: np.ndarray
    """(L, D) feature of each slot, n_features for padding"""
    slot_cover: np.ndarray
    """(L, D) product of cover fractions per slot, 1 for padding"""
    quad_nodes: np.ndarray
    quad_weights: np.ndarray
    scatter: sp.csr_matrix
    """(L * D, n_features + 1) one-hot map from slots to feature columns"""
    expected_value: float


_tables: "weakref.WeakKeyDictionary[TreeEnsemble, _LeafTable]" = weakref.WeakKeyDictionary()


def _leaf_paths(ensemble: TreeEnsemble) -> List[Dict]:
    leaves = []
    for tree in ensemble.trees:
        stack = [(0, [])]
        while stack:
            node, path = stack.pop()
            if tree.children_left[node] == LEAF:
                leaves.append(dict(value=ensemble.learning_rate * tree.values[node], path=path))
                continue
            cover = tree.node_sample_weight[node]
            f = int(tree.features[node])
            t = float(tree.thresholds[node])
            for child, went_left in ((tree.children_right[node], False), (tree.children_left[node], True)):
                frac = tree.node_sample_weight[child] / cover
                stack.append((child, path + [(f, t, went_left, frac)]))
    return leaves


def _build_table(ensemble: TreeEnsemble) -> _LeafTable:
    n_features = ensemble.n_features
    leaves = _leaf_paths(ensemble)
    L = len(leaves)
    M = max(1, max(len(leaf["path"]) for leaf in leaves))
    D = max(1, max(len({f for f, *_ in leaf["path"]}) for leaf in leaves))

    values = np.array([leaf["value"] for leaf in leaves])
    path_features = np.full((L, M), -1, dtype=np.int64)
    path_thresholds = np.zeros((L, M))
    path_left = np.ones((L, M), dtype=bool)
    path_slots = np.full((L, M), D, dtype=np.int64)
    slot_features = np.full((L, D), n_features, dtype=np.int64)
    slot_cover = np.ones((L, D))
    for l, leaf in enumerate(leaves):
        slots: Dict[int, int] = {}
        for m, (f, t, went_left, frac) in enumerate(leaf["path"]):
            s = slots.setdefault(f, len(slots))
            path_features[l, m] = f
            path_thresholds[l, m] = t
            path_left[l, m] = went_left
            path_slots[l, m] = s
            slot_features[l, s] = f
            slot_cover[l, s] *= frac

    Q = D // 2 + 1
    x, w = np.polynomial.legendre.leggauss(Q)
    scatter = sp.csr_matrix(
        (np.ones(L * D), (np.arange(L * D), slot_features.ravel())), shape=(L * D, n_features + 1)
    )
    expected = ensemble.base_score + float((values * slot_cover.prod(axis=1)).sum())
    return _LeafTable(
        values=values,
        path_features=path_features,
        path_thresholds=path_thresholds,
        path_left=path_left,
        path_slots=path_slots,
        slot_features=slot_features,
        slot_cover=slot_cover,
        quad_nodes=(x + 1.0) / 2.0,
        quad_weights=w / 2.0,
        scatter=scatter,
        expected_value=expected,
    )


def _table(ensemble: TreeEnsemble) -> _LeafTable:
    table = _tables.get(ensemble)
    if table is None:
        table = _tables[ensemble] = _build_table(ensemble)
    return table


def expected_value(ensemble: TreeEnsemble) -> float:
    return _table(ensemble).expected_value


def _shap_chunk(table: _LeafTable, Z: np.ndarray) -> np.ndarray:
    R = Z.shape[0]
    L, D = table.slot_cover.shape
    leaf_index = np.arange(L)

    x = Z[:, np.maximum(table.path_features, 0)]
    cond = np.where(table.path_left, x <= table.path_thresholds, x > table.path_thresholds)
    cond |= table.path_features < 0
    fails = np.zeros((R, L, D + 1))
    for m in range(table.path_features.shape[1]):
        fails[:, leaf_index, table.path_slots[:, m]] += ~cond[:, :, m]
    o = (fails[:, :, :D] == 0).astype(np.float64)

    delta = o - table.slot_cover
    factors = table.slot_cover[None, :, :, None] + delta[..., None] * table.quad_nodes
    full = factors.prod(axis=2) * table.quad_weights
    integral = np.einsum("rlq,rldq->rld", full, 1.0 / factors)
    contrib = table.values[None, :, None] * delta * integral
    phi = np.asarray(table.scatter.T @ contrib.reshape(R, L * D).T).T
    return phi[:, :-1]


def shap_values(ensemble: TreeEnsemble, X: np.ndarray) -> np.ndarray:
    """(n_rows, n_features) attributions for raw feature rows."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Z = standardize(X, ensemble.scaler)
    table = _table(ensemble)
    L, D = table.slot_cover.shape
    chunk = max(1, MAX_CHUNK_CELLS // (L * D * len(table.quad_nodes)))
    return np.concatenate([_shap_chunk(table, Z[i : i + chunk]) for i in range(0, len(Z), chunk)], axis=0)


def tree_shap(ensemble: TreeEnsemble, vec: np.ndarray) -> AttributionVector:
    return AttributionVector(phi=shap_values(ensemble, vec)[0], base=expected_value(ensemble))


def mean_abs_shap(ensemble: TreeEnsemble, X: np.ndarray) -> np.ndarray:
    if len(X) == 0:
        return np.zeros(ensemble.n_features)
    return np.abs(shap_values(ensemble, X)).mean(axis=0)
