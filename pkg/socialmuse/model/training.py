"""End-to-end training: grouped split, SHAP feature elimination, grid search, final fit and
held-out evaluation against a ridge baseline and single-category ablations."""
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from sklearn.impute import SimpleImputer
from sklearn.linear_model import Ridge
from sklearn.metrics import mean_absolute_error
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from socialmuse.config.search_grids import create_search_grid
from socialmuse.features.context import FEATURE_NAMES, NETWORK_MASK, SEMANTIC_MASK
from socialmuse.model.dataset import TrainingSet
from socialmuse.model.gbt import GBTParams, TreeEnsemble, fit_gbt
from socialmuse.model.selection import grid_search_cv, grouped_split, r2, rfe_by_shap
from socialmuse.model.tree_shap import mean_abs_shap
from socialmuse.utils.errors import InvalidInput
from socialmuse.utils.logging_utils import logger


@dataclass
class TrainingConfig:
    grid: str = "desk"
    """named hyperparameter grid: full, desk or smoke"""
    folds: int = 5
    """number of ego-grouped cross-validation folds"""
    test_ratio: float = 0.2
    """share of egos held out for testing"""
    seed: int = 0
    """seed for the split and for row/column subsampling"""
    rfe: bool = True
    """if toggled, eliminate features by out-of-fold SHAP importance before the grid search"""
    rfe_min_features: int = 5
    """elimination never goes below this many features"""
    rfe_shap_rows: int = 200
    """validation rows per fold used for SHAP importance"""
    rfe_n_estimators: int = 50
    """boosting rounds of the models fitted during elimination"""
    rfe_max_depth: int = 3
    """tree depth of the models fitted during elimination"""
    ablations: bool = True
    """if toggled, also report held-out R2 of semantic-only and network-only models"""
    top_k_features: int = 5
    """number of globally most important features to report"""
    include_alters_in_pool: bool = False
    """if toggled, alters' ideas count towards the marginal pool when building targets"""
    n_jobs: int = 1
    """parallel workers for cross-validation"""


@dataclass
class TrainingReport:
    best_point: Dict
    test_r2: float
    test_mae: float
    ridge_r2: float
    ridge_mae: float
    n_train_egos: int
    n_test_egos: int
    ablation_r2: Dict[str, float] = field(default_factory=dict)
    top_features: List[Tuple[str, float]] = field(default_factory=list)
    cv_table: Optional[pd.DataFrame] = None
    rfe_steps: Optional[pd.DataFrame] = None

    def summary(self) -> Dict:
        return dict(
            best_point=self.best_point,
            test_r2=self.test_r2,
            test_mae=self.test_mae,
            ridge_r2=self.ridge_r2,
            ridge_mae=self.ridge_mae,
            n_train_egos=self.n_train_egos,
            n_test_egos=self.n_test_egos,
            ablation_r2=self.ablation_r2,
            top_features=[dict(feature=f, mean_abs_shap=v) for f, v in self.top_features],
        )


def fit_ridge_baseline(train: TrainingSet, alpha: float = 1.0):
    model = make_pipeline(SimpleImputer(strategy="mean", keep_empty_features=True), StandardScaler(), Ridge(alpha=alpha))
    return model.fit(train.X, train.y)


def evaluate(ensemble: TreeEnsemble, test: TrainingSet) -> Tuple[float, float]:
    """Held-out R2 and MAE of the clamped predictions."""
    pred = np.maximum(ensemble.predict_raw(test.X), 0.0)
    return r2(test.y, pred), float(mean_absolute_error(test.y, pred))


def train_model(dataset: TrainingSet, config: TrainingConfig, tracker=None) -> Tuple[TreeEnsemble, TrainingReport]:
    if len(dataset) == 0:
        raise InvalidInput("the training set is empty")
    train, test = grouped_split(dataset, config.test_ratio, config.seed)
    n_train_egos, n_test_egos = len(np.unique(train.groups)), len(np.unique(test.groups))
    print(f"split: {n_train_egos} train egos ({len(train)} rows), {n_test_egos} test egos ({len(test)} rows)")
    names = FEATURE_NAMES if dataset.X.shape[1] == len(FEATURE_NAMES) else tuple(f"f{j}" for j in range(dataset.X.shape[1]))

    grid = create_search_grid(config.grid)
    base = GBTParams(seed=config.seed)
    selected = np.ones(dataset.X.shape[1], dtype=bool)
    rfe_steps = None
    elimination: List[str] = []
    if config.rfe:
        rfe_params = base.with_grid_point(dict(grid[0], n_estimators=config.rfe_n_estimators, max_depth=config.rfe_max_depth))
        result = rfe_by_shap(
            train, rfe_params, config.folds, config.rfe_min_features, config.rfe_shap_rows, config.n_jobs, names
        )
        selected = result.selected
        rfe_steps = result.steps
        elimination = [names[j] for j in result.elimination_order]
        if tracker is not None:
            for _, row in rfe_steps.iterrows():
                tracker.add_scalar("rfe/cv_r2", row["mean_r2"], int(row["n_features"]))
        print(f"feature elimination kept {int(selected.sum())} of {len(selected)} features")

    best_point, cv_table = grid_search_cv(train, grid, base, config.folds, selected, config.n_jobs)
    if tracker is not None:
        for _, row in cv_table.iterrows():
            tracker.add_scalar("grid/mean_cv_r2", row["mean_r2"], int(row["point"]))

    params = base.with_grid_point(best_point)
    ensemble = fit_gbt(train.X, train.y, params, selected, names)
    test_r2, test_mae = evaluate(ensemble, test)
    ridge = fit_ridge_baseline(train)
    ridge_pred = np.maximum(ridge.predict(test.X), 0.0)
    ridge_r2, ridge_mae = r2(test.y, ridge_pred), float(mean_absolute_error(test.y, ridge_pred))

    ablation_r2 = {}
    if config.ablations and len(names) == len(FEATURE_NAMES):
        for category, mask in (("semantic", SEMANTIC_MASK), ("network", NETWORK_MASK)):
            if not (selected & mask).any():
                ablation_r2[category] = float("nan")
                continue
            ablation_r2[category] = evaluate(fit_gbt(train.X, train.y, params, selected & mask, names), test)[0]

    importance = mean_abs_shap(ensemble, test.X)
    top = [(names[j], float(importance[j])) for j in np.argsort(-importance, kind="stable")[: config.top_k_features]]

    if tracker is not None:
        for step, loss in enumerate(ensemble.metadata["loss_curve"]):
            tracker.add_scalar("train/loss", loss, step)
        tracker.add_scalar("test/r2", test_r2, 0)
        tracker.add_scalar("test/mae", test_mae, 0)
        tracker.add_scalar("test/ridge_r2", ridge_r2, 0)

    best_row = cv_table[cv_table["best"]].iloc[0]
    metadata = dict(
        ensemble.metadata,
        grid=config.grid,
        grid_point=best_point,
        cv_mean_r2=float(best_row["mean_r2"]),
        cv_std_r2=float(best_row["std_r2"]),
        rfe_elimination_order=elimination,
        test_r2=test_r2,
        test_mae=test_mae,
        seed=config.seed,
    )
    ensemble = replace(ensemble, metadata=metadata)
    report = TrainingReport(
        best_point=best_point,
        test_r2=test_r2,
        test_mae=test_mae,
        ridge_r2=ridge_r2,
        ridge_mae=ridge_mae,
        n_train_egos=n_train_egos,
        n_test_egos=n_test_egos,
        ablation_r2=ablation_r2,
        top_features=top,
        cv_table=cv_table,
        rfe_steps=rfe_steps,
    )
    logger.info(f"held-out R2 {test_r2:.4f} MAE {test_mae:.4f} (ridge R2 {ridge_r2:.4f})")
    return ensemble, report
