"""Ego-grouped splitting, grid search with grouped cross-validation, and recursive feature
elimination driven by out-of-fold Shapley importance."""
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from sklearn.metrics import r2_score
from sklearn.model_selection import GroupKFold, GroupShuffleSplit

from socialmuse.model.dataset import TrainingSet
from socialmuse.model.gbt import GBTParams, fit_gbt
from socialmuse.model.tree_shap import shap_values
from socialmuse.utils.errors import InvalidInput
from socialmuse.utils.logging_utils import logger


def r2(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    """1 - SSE/SST, defined as 0 when the truth is constant."""
    y_true = np.asarray(y_true, dtype=np.float64)
    if len(y_true) < 2 or np.all(y_true == y_true[0]):
        return 0.0
    return float(r2_score(y_true, y_pred))


def grouped_split(dataset: TrainingSet, test_ratio: float = 0.2, seed: int = 0) -> Tuple[TrainingSet, TrainingSet]:
    """Split by ego so that all rows of one ego land on the same side; round(ratio * egos) egos go to test."""
    n_groups = len(np.unique(dataset.groups))
    n_test = int(round(test_ratio * n_groups))
    if n_groups < 2 or n_test < 1 or n_test >= n_groups:
        raise InvalidInput(f"cannot split {n_groups} egos at ratio {test_ratio}")
    splitter = GroupShuffleSplit(n_splits=1, test_size=n_test, random_state=seed)
    train_idx, test_idx = next(splitter.split(dataset.X, dataset.y, dataset.groups))
    return dataset.subset(np.sort(train_idx)), dataset.subset(np.sort(test_idx))


def _folds(dataset: TrainingSet, folds: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    n_groups = len(np.unique(dataset.groups))
    if n_groups < 2:
        raise InvalidInput("cross-validation needs at least two egos")
    return list(GroupKFold(n_splits=min(folds, n_groups)).split(dataset.X, dataset.y, dataset.groups))


def _cv_task(dataset: TrainingSet, train_idx, val_idx, params: GBTParams, selected: Optional[np.ndarray]) -> float:
    model = fit_gbt(dataset.X[train_idx], dataset.y[train_idx], params, selected)
    return r2(dataset.y[val_idx], model.predict_raw(dataset.X[val_idx]))


def grid_search_cv(
    train: TrainingSet,
    grid: Sequence[Dict],
    base_params: GBTParams = GBTParams(),
    folds: int = 5,
    selected: Optional[np.ndarray] = None,
    n_jobs: int = 1,
) -> Tuple[Dict, pd.DataFrame]:
    """Mean grouped-CV R^2 for every grid point.

    The best point has the highest mean; ties go to fewer estimators, then lower depth, then grid order.
    """
    if len(grid) == 0:
        raise InvalidInput("empty search grid")
    splits = _folds(train, folds)
    points = [base_params.with_grid_point(p) for p in grid]
    scores = Parallel(n_jobs=n_jobs)(
        delayed(_cv_task)(train, tr, va, params, selected) for params in points for tr, va in splits
    )
    scores = np.asarray(scores).reshape(len(points), len(splits))
    rows = []
    for i, (point, params) in enumerate(zip(grid, points)):
        row = dict(point=i, **point)
        row.update({f"fold_{k}": float(s) for k, s in enumerate(scores[i])})
        row["mean_r2"] = float(scores[i].mean())
        row["std_r2"] = float(scores[i].std())
        rows.append(row)
    table = pd.DataFrame(rows)
    best = min(
        range(len(points)),
        key=lambda i: (-round(table.loc[i, "mean_r2"], 12), points[i].n_estimators, points[i].max_depth, i),
    )
    table["best"] = table["point"] == best
    logger.info(f"grid search: best point {best} of {len(points)} with mean CV R2 {table.loc[best, 'mean_r2']:.4f}")
    return dict(grid[best]), table


@dataclass(frozen=True, eq=False)
class RFEResult:
    selected: np.ndarray
    elimination_order: Tuple[int, ...]
    """feature indices in the order they were dropped"""
    steps: pd.DataFrame


def _rfe_fold_task(dataset: TrainingSet, train_idx, val_idx, params: GBTParams, selected: np.ndarray, shap_rows: int, seed: int):
    model = fit_gbt(dataset.X[train_idx], dataset.y[train_idx], params, selected)
    score = r2(dataset.y[val_idx], model.predict_raw(dataset.X[val_idx]))
    if len(val_idx) > shap_rows:
        val_idx = np.sort(np.random.default_rng(seed).choice(val_idx, shap_rows, replace=False))
    phi = shap_values(model, dataset.X[val_idx])
    return score, np.abs(phi).sum(axis=0), len(val_idx)


def rfe_by_shap(
    train: TrainingSet,
    params: GBTParams = GBTParams(n_estimators=50, max_depth=3, num_leaves=8),
    folds: int = 5,
    min_features: int = 5,
    shap_rows: int = 200,
    n_jobs: int = 1,
    feature_names: Optional[Sequence[str]] = None,
) -> RFEResult:
    """Drop one feature at a time, the one with the lowest mean |phi| on out-of-fold rows.

    Ties in importance go to the lower training variance, then to the higher column index. The
    feature set with the best mean CV R^2 is kept (ties: fewer features).
    """
    n_features = train.X.shape[1]
    if n_features < min_features:
        raise InvalidInput(f"only {n_features} features, fewer than the minimum {min_features}")
    splits = _folds(train, folds)
    variance = np.nan_to_num(np.nanvar(train.X, axis=0), nan=0.0)
    index = np.arange(n_features)
    mask = np.ones(n_features, dtype=bool)
    masks, scores, dropped = [], [], []
    rows = []
    while True:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_rfe_fold_task)(train, tr, va, params, mask, shap_rows, params.seed + k)
            for k, (tr, va) in enumerate(splits)
        )
        score = float(np.mean([r[0] for r in results]))
        importance = sum(r[1] for r in results) / sum(r[2] for r in results)
        masks.append(mask.copy())
        scores.append(score)
        row = dict(step=len(rows), n_features=int(mask.sum()), mean_r2=score, dropped=None)
        if mask.sum() <= min_features:
            rows.append(row)
            break
        live = np.flatnonzero(mask)
        order = np.lexsort((-index[live], variance[live], importance[live]))
        drop = int(live[order[0]])
        row["dropped"] = feature_names[drop] if feature_names is not None else drop
        rows.append(row)
        dropped.append(drop)
        mask[drop] = False
        logger.info(f"rfe: {row['n_features']} features, CV R2 {score:.4f}, dropping {row['dropped']}")

    best = min(range(len(masks)), key=lambda i: (-round(scores[i], 12), masks[i].sum()))
    steps = pd.DataFrame(rows)
    steps["best"] = steps["step"] == best
    return RFEResult(selected=masks[best], elimination_order=tuple(dropped), steps=steps)
