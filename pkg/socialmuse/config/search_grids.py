from typing import Dict, List

from sklearn.model_selection import ParameterGrid

from socialmuse.utils.errors import InvalidConfig

FULL_GRID = {
    "n_estimators": [100, 200, 300],
    "learning_rate": [0.001, 0.01, 0.05, 0.1, 0.2],
    "max_depth": [3, 5, 7, 10],
    "subsample": [0.5, 0.75, 1.0],
    "colsample_bytree": [0.5, 0.75, 1.0],
    "num_leaves": [25, 30, 35],
}


def create_search_grid(uid: str = "full") -> List[Dict]:
    """Map a grid name to its list of hyperparameter points, in a fixed order.

    "full" is the complete 1620-point grid; "desk" is a small slice of it that trains in minutes
    inside `simulate`; "smoke" is a single point for quick checks.
    """
    if uid == "full":
        grid = FULL_GRID
    elif uid == "desk":
        grid = {
            "n_estimators": [100],
            "learning_rate": [0.05, 0.1],
            "max_depth": [3, 5],
            "subsample": [1.0],
            "colsample_bytree": [0.75],
            "num_leaves": [25],
        }
    elif uid == "smoke":
        grid = {
            "n_estimators": [100],
            "learning_rate": [0.1],
            "max_depth": [3],
            "subsample": [1.0],
            "colsample_bytree": [1.0],
            "num_leaves": [25],
        }
    else:
        raise InvalidConfig(f"unknown search grid {uid!r}, expected one of full, desk, smoke")
    return list(ParameterGrid(grid))
