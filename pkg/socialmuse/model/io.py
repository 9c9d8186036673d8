"""Model file: one JSON document.

Fields:
    format_version      integer, bumped on incompatible changes
    feature_schema      feature schema version the model was trained against
    feature_names       column names, in input order
    scaler.mean         training means, also the imputation values
    scaler.scale        training std per column, 0 for constant columns
    selected            boolean mask of the columns the trees may split on
    base_score          mean training target
    learning_rate       shrinkage applied to every tree
    trees[]             node arrays: children_left, children_right, features, thresholds,
                        values, node_sample_weight (leaves have children -1)
    metadata            hyperparameters, regularization constants, CV scores, loss curve
"""
import hashlib
import json
from pathlib import Path
from typing import Union

import numpy as np

from socialmuse.features.context import FEATURE_SCHEMA_VERSION, ScalerParams
from socialmuse.model.gbt import Tree, TreeEnsemble
from socialmuse.utils.errors import SchemaError

FORMAT_VERSION = 1

_TREE_FIELDS = ("children_left", "children_right", "features", "thresholds", "values", "node_sample_weight")
_INT_FIELDS = {"children_left", "children_right", "features"}


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"{type(value)} is not JSON serializable")


def model_to_dict(ensemble: TreeEnsemble) -> dict:
    return dict(
        format_version=FORMAT_VERSION,
        feature_schema=FEATURE_SCHEMA_VERSION,
        feature_names=list(ensemble.feature_names),
        scaler=dict(mean=ensemble.scaler.mean, scale=ensemble.scaler.scale),
        selected=ensemble.selected,
        base_score=ensemble.base_score,
        learning_rate=ensemble.learning_rate,
        trees=[{name: getattr(t, name) for name in _TREE_FIELDS} for t in ensemble.trees],
        metadata=ensemble.metadata,
    )


def save_model(ensemble: TreeEnsemble, path: Union[str, Path]) -> None:
    with open(path, "w") as f:
        json.dump(model_to_dict(ensemble), f, default=_jsonable, sort_keys=True)
        f.write("\n")


def load_model(path: Union[str, Path]) -> TreeEnsemble:
    try:
        with open(path, "r") as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"invalid JSON ({e.msg})", str(path), e.lineno) from None
    if raw.get("format_version") != FORMAT_VERSION:
        raise SchemaError(f"unsupported model format {raw.get('format_version')!r}, expected {FORMAT_VERSION}", str(path))
    if raw.get("feature_schema") != FEATURE_SCHEMA_VERSION:
        raise SchemaError(f"model was trained on feature schema {raw.get('feature_schema')!r}", str(path))
    try:
        trees = tuple(
            Tree(**{
                name: np.asarray(t[name], dtype=np.int64 if name in _INT_FIELDS else np.float64)
                for name in _TREE_FIELDS
            })
            for t in raw["trees"]
        )
        return TreeEnsemble(
            trees=trees,
            learning_rate=float(raw["learning_rate"]),
            base_score=float(raw["base_score"]),
            scaler=ScalerParams(
                mean=np.asarray(raw["scaler"]["mean"], dtype=np.float64),
                scale=np.asarray(raw["scaler"]["scale"], dtype=np.float64),
            ),
            selected=np.asarray(raw["selected"], dtype=bool),
            feature_names=tuple(raw["feature_names"]),
            metadata=raw.get("metadata", {}),
        )
    except KeyError as e:
        raise SchemaError(f"missing field {e.args[0]!r}", str(path)) from None


def model_hash(path: Union[str, Path]) -> str:
    with open(path, "rb") as f:
        return hashlib.sha256(f.read()).hexdigest()
