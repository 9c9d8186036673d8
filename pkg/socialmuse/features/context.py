"""The 36-feature vector describing one (ego, round, candidate alter pair) context.

Semantic features come from the ideas of the previous round; network features come from the
hypothetical current-round network in which the ego follows the candidate pair and every ego that
arrived earlier keeps its actual choice.
"""
import math
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.preprocessing import StandardScaler

from socialmuse.data.trial import Pair, TrialState
from socialmuse.network.bipartite import NETWORK_FEATURES, structural_features
from socialmuse.semantics.embeddings import DISTANCE_METHODS, EmbeddingTable, doc_distance
from socialmuse.semantics.taxonomy import Taxonomy, creativity_quotient
from socialmuse.utils.errors import InvalidInput, MissingVocabulary

FEATURE_SCHEMA_VERSION = 1


def _slug(method: str) -> str:
    return method.replace("-", "_").lower()


SEMANTIC_FEATURES = (
    ("cq_ego_attempt1", "cq_ego_attempt2", "cq_ego_combined", "cq_alter_sum")
    + tuple(
        f"{_slug(m)}_{stat}"
        for m in DISTANCE_METHODS
        for stat in ("ego_alter_min", "ego_alter_max", "ego_alter_mean", "ego_alter_std", "ego_concat", "alter_alter")
    )
    + ("gender_diversity",)
)
ROUND_FEATURE = "round_id"
FEATURE_NAMES = SEMANTIC_FEATURES + NETWORK_FEATURES + (ROUND_FEATURE,)
N_FEATURES = len(FEATURE_NAMES)
assert N_FEATURES == 36

SEMANTIC_MASK = np.array([n in SEMANTIC_FEATURES for n in FEATURE_NAMES])
NETWORK_MASK = np.array([n in NETWORK_FEATURES for n in FEATURE_NAMES])


@dataclass
class SemanticContext:
    """Taxonomy and embedding tables, with memoised CQ and document-distance evaluations."""

    taxonomy: Taxonomy
    tables: Mapping[str, EmbeddingTable]
    _cq: Dict[frozenset, float] = field(default_factory=dict, repr=False)
    _dist: Dict[tuple, float] = field(default_factory=dict, repr=False)

    def cq(self, concepts: Iterable[str]) -> float:
        key = frozenset(concepts)
        if key not in self._cq:
            self._cq[key] = creativity_quotient(self.taxonomy, key).Q
        return self._cq[key]

    def distance(self, method: str, doc1: Sequence[str], doc2: Sequence[str]) -> float:
        """NaN when either document has no vector."""
        key = (method, tuple(doc1), tuple(doc2))
        if key not in self._dist:
            try:
                self._dist[key] = doc_distance(method, self.tables, doc1, doc2)
            except MissingVocabulary:
                self._dist[key] = math.nan
        return self._dist[key]


def _pair_stats(d_a: float, d_b: float) -> Tuple[float, float, float, float]:
    if math.isnan(d_a) or math.isnan(d_b):
        return (math.nan,) * 4
    # population std of two values
    return min(d_a, d_b), max(d_a, d_b), (d_a + d_b) / 2.0, abs(d_a - d_b) / 2.0


def semantic_block(state: TrialState, semantic: SemanticContext, ego: str, round: int, pair: Pair) -> List[float]:
    prev = round - 1
    a, b = state.canonical_pair(pair)
    values = [
        semantic.cq(state.concepts_of(ego, prev, (1,))),
        semantic.cq(state.concepts_of(ego, prev, (2,))),
        semantic.cq(state.concepts_of(ego, prev, (1, 2))),
        semantic.cq(state.concepts_of(a, prev, (1,))) + semantic.cq(state.concepts_of(b, prev, (1,))),
    ]
    ego_doc = state.tokens_of(ego, prev, (1,))
    doc_a = state.tokens_of(a, prev, (1,))
    doc_b = state.tokens_of(b, prev, (1,))
    for method in DISTANCE_METHODS:
        d_a = semantic.distance(method, ego_doc, doc_a)
        d_b = semantic.distance(method, ego_doc, doc_b)
        values.extend(_pair_stats(d_a, d_b))
        values.append(semantic.distance(method, ego_doc, doc_a + doc_b))
        values.append(semantic.distance(method, doc_a, doc_b))
    ego_gender = state.genders.get(ego)
    values.append(float(sum(state.genders.get(x) != ego_gender for x in (a, b))))
    return values


def assemble(state: TrialState, semantic: SemanticContext, ego: str, round: int, pair: Pair) -> np.ndarray:
    """Feature vector in FEATURE_NAMES order; NaN marks a distance with no vocabulary coverage."""
    if round < 2:
        raise InvalidInput("features need a completed previous round, so round must be at least 2")
    network = structural_features(state.hypothetical_round(round, ego, pair), ego)
    values = semantic_block(state, semantic, ego, round, pair)
    values.extend(network[name] for name in NETWORK_FEATURES)
    values.append(float(round))
    return np.asarray(values, dtype=np.float64)


def candidate_pairs(state: TrialState) -> List[Pair]:
    """All alter pairs, lexicographic by alter index."""
    return list(combinations(state.alter_ids, state.k))


def assemble_candidates(
    state: TrialState, semantic: SemanticContext, ego: str, round: int
) -> Tuple[List[Pair], np.ndarray]:
    pairs = candidate_pairs(state)
    return pairs, np.stack([assemble(state, semantic, ego, round, p) for p in pairs])


def feature_dict(vec: np.ndarray) -> Dict[str, float]:
    return dict(zip(FEATURE_NAMES, (float(v) for v in vec)))


@dataclass(frozen=True, eq=False)
class ScalerParams:
    mean: np.ndarray
    scale: np.ndarray
    """0 marks a constant training column"""

    @classmethod
    def fit(cls, X: np.ndarray) -> "ScalerParams":
        """Column means and std, ignoring NaN; the means double as imputation values."""
        scaler = StandardScaler().fit(X)
        mean = np.nan_to_num(scaler.mean_, nan=0.0)
        scale = np.where(np.nan_to_num(scaler.var_, nan=0.0) > 0, scaler.scale_, 0.0)
        return cls(mean=mean, scale=scale)

    @classmethod
    def identity(cls, n: int = N_FEATURES) -> "ScalerParams":
        return cls(mean=np.zeros(n), scale=np.ones(n))


def standardize(X: np.ndarray, params: ScalerParams) -> np.ndarray:
    """(x - mean) / scale per column; missing values and constant columns become 0."""
    X = np.asarray(X, dtype=np.float64)
    safe = np.where(params.scale > 0, params.scale, 1.0)
    Z = (X - params.mean) / safe
    Z = np.where(params.scale > 0, Z, 0.0)
    return np.nan_to_num(Z, nan=0.0)


def write_feature_matrix(path: Union[str, Path], X: np.ndarray, extra: Mapping[str, Sequence] = None) -> None:
    frame = pd.DataFrame(np.asarray(X), columns=list(FEATURE_NAMES))
    for i, (name, column) in enumerate((extra or {}).items()):
        frame.insert(i, name, list(column))
    frame.to_csv(path, index=False)
