"""Alter-pair recommendation with a one-line explanation.

Every pair of alters is scored as if the ego followed it next round; the highest predicted
marginal distinct count wins, ties going to the lexicographically smallest pair by alter index.
The explanation names the feature whose attribution separates the chosen pair most from the
other candidates, and says whether that feature is semantic or structural.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from socialmuse.data.io import read_jsonl, write_jsonl
from socialmuse.data.trial import Pair, TrialState
from socialmuse.features.context import (
    FEATURE_NAMES,
    NETWORK_MASK,
    SEMANTIC_MASK,
    SemanticContext,
    assemble,
    assemble_candidates,
)
from socialmuse.model.gbt import TreeEnsemble
from socialmuse.model.tree_shap import AttributionVector, expected_value, shap_values
from socialmuse.utils.errors import NotReady, SchemaError

SEMANTIC = "semantic"
NETWORK = "network"
LABELS = {
    SEMANTIC: "Recommended for better inspiration",
    NETWORK: "Recommended for reducing idea redundancy",
}
MIN_NETWORK_SIZE = 2
MAX_NETWORK_SIZE = 18

# round_id competes in neither category
_COMPETING = np.flatnonzero(SEMANTIC_MASK | NETWORK_MASK)
_NETWORK_SIZE = FEATURE_NAMES.index("network_size")


@dataclass(frozen=True, eq=False)
class Candidate:
    pair: Pair
    features: np.ndarray
    score: float
    attribution: AttributionVector


@dataclass(frozen=True)
class Explanation:
    label: str
    dominant_feature: str
    dominant_category: str


@dataclass(frozen=True, eq=False)
class Recommendation:
    trial: str
    condition: str
    ego_id: str
    round: int
    candidates: Tuple[Candidate, ...]
    chosen_pair: Pair
    explanation: str
    dominant_feature: str
    dominant_category: str

    @property
    def chosen(self) -> Candidate:
        return next(c for c in self.candidates if c.pair == self.chosen_pair)

    @property
    def network_size(self) -> int:
        return int(self.chosen.features[_NETWORK_SIZE])

    def to_record(self) -> dict:
        return dict(
            trial=self.trial,
            condition=self.condition,
            ego_id=self.ego_id,
            round=self.round,
            network_size=self.network_size,
            chosen_pair=list(self.chosen_pair),
            chosen_score=self.chosen.score,
            explanation=self.explanation,
            dominant_feature=self.dominant_feature,
            dominant_category=self.dominant_category,
            base_value=self.chosen.attribution.base,
            candidates=[
                dict(pair=list(c.pair), score=c.score, phi=c.attribution.phi.tolist(), features=c.features.tolist())
                for c in self.candidates
            ],
        )


def dominant_feature(phi: np.ndarray, chosen: int) -> Explanation:
    """Feature with the largest gap between |phi| of the chosen candidate and the mean |phi| of the others.

    Ties, including the all-equal case, go to the first feature in canonical order.
    """
    magnitude = np.abs(np.asarray(phi, dtype=np.float64))
    others = np.delete(magnitude, chosen, axis=0)
    gap = np.abs(magnitude[chosen] - others.mean(axis=0)) if len(others) else magnitude[chosen]
    j = int(_COMPETING[np.argmax(gap[_COMPETING])])
    category = SEMANTIC if SEMANTIC_MASK[j] else NETWORK
    return Explanation(LABELS[category], FEATURE_NAMES[j], category)


def explain(recommendation: Recommendation) -> Explanation:
    phi = np.stack([c.attribution.phi for c in recommendation.candidates])
    chosen = [c.pair for c in recommendation.candidates].index(recommendation.chosen_pair)
    return dominant_feature(phi, chosen)


def recommend(
    state: TrialState, semantic: SemanticContext, ego: str, round: int, ensemble: Optional[TreeEnsemble]
) -> Recommendation:
    if ensemble is None:
        raise NotReady("no trained model is loaded")
    pairs, X = assemble_candidates(state, semantic, ego, round)
    scores = ensemble.predict_raw(X)
    best = int(np.argmax(scores))
    if __debug__:
        # the winner rebuilt from scratch must still beat every candidate
        rescored = ensemble.predict_raw(assemble(state, semantic, ego, round, pairs[best])[None, :])[0]
        assert np.isclose(rescored, scores[best]) and all(rescored >= s - 1e-12 for s in scores)
    phi = shap_values(ensemble, X)
    base = expected_value(ensemble)
    candidates = tuple(
        Candidate(pair, X[i], float(scores[i]), AttributionVector(phi[i], base)) for i, pair in enumerate(pairs)
    )
    explanation = dominant_feature(phi, best)
    return Recommendation(
        trial=state.trial,
        condition=state.condition,
        ego_id=ego,
        round=round,
        candidates=candidates,
        chosen_pair=pairs[best],
        explanation=explanation.label,
        dominant_feature=explanation.dominant_feature,
        dominant_category=explanation.dominant_category,
    )


def pending_egos(state: TrialState, round: int) -> List[str]:
    """Egos who finished the previous round but have not chosen alters for `round` yet, in arrival order."""
    return [e for e in state.ego_ids if state.has_completed(e, round - 1) and state.choice(round, e) is None]


def write_recommendations(path: Union[str, Path], recommendations: Iterable[Recommendation]) -> None:
    write_jsonl(path, (r.to_record() for r in recommendations))


_REQUIRED = ("trial", "condition", "ego_id", "round", "network_size", "chosen_pair", "dominant_feature", "dominant_category")


def read_recommendations(path: Union[str, Path]) -> List[dict]:
    records = []
    for line_number, raw in read_jsonl(path):
        missing = [k for k in _REQUIRED if k not in raw]
        if missing:
            raise SchemaError(f"recommendation record lacks {missing}", str(path), line_number)
        if raw["dominant_category"] not in LABELS:
            raise SchemaError(f"unknown category {raw['dominant_category']!r}", str(path), line_number)
        records.append(raw)
    return records


def _decisions(records: Sequence[dict]) -> pd.DataFrame:
    frame = pd.DataFrame(
        [dict(round=int(r["round"]), network_size=int(r["network_size"]), semantic=r["dominant_category"] == SEMANTIC) for r in records],
        columns=["round", "network_size", "semantic"],
    )
    return frame[(frame["network_size"] >= MIN_NETWORK_SIZE) & (frame["network_size"] <= MAX_NETWORK_SIZE)]


def dominance_profile(records: Sequence[dict]) -> pd.DataFrame:
    """Fraction of semantic-dominated decisions per (round, network size)."""
    frame = _decisions(records)
    out = frame.groupby(["round", "network_size"])["semantic"].agg(["mean", "size"]).reset_index()
    return out.rename(columns={"mean": "semantic_fraction", "size": "decisions"})


def dominance_by_size(records: Sequence[dict]) -> pd.DataFrame:
    frame = _decisions(records)
    out = frame.groupby("network_size")["semantic"].agg(["mean", "size"]).reset_index()
    return out.rename(columns={"mean": "semantic_fraction", "size": "decisions"})
