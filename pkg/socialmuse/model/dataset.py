"""Training rows replayed from finished trials: one row per (ego, round >= 2) with the features of the
pair the ego actually followed and its marginal distinct count as target."""
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from socialmuse.data.trial import TrialState
from socialmuse.features.context import FEATURE_NAMES, SemanticContext, assemble, write_feature_matrix
from socialmuse.metrics.rarity import marginal_distinct_series


@dataclass(frozen=True, eq=False)
class TrainingSet:
    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray
    """one id per ego, "trial/condition/ego" """
    rounds: np.ndarray

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, idx: np.ndarray) -> "TrainingSet":
        return TrainingSet(self.X[idx], self.y[idx], self.groups[idx], self.rounds[idx])

    @classmethod
    def concat(cls, parts: Sequence["TrainingSet"]) -> "TrainingSet":
        parts = [p for p in parts if len(p)]
        if not parts:
            return cls.empty()
        return cls(
            np.concatenate([p.X for p in parts]),
            np.concatenate([p.y for p in parts]),
            np.concatenate([p.groups for p in parts]),
            np.concatenate([p.rounds for p in parts]),
        )

    @classmethod
    def empty(cls, n_features: int = len(FEATURE_NAMES)) -> "TrainingSet":
        return cls(np.zeros((0, n_features)), np.zeros(0), np.zeros(0, dtype=object), np.zeros(0, dtype=np.int64))

    def write_csv(self, path: Union[str, Path]) -> None:
        write_feature_matrix(path, self.X, dict(ego=self.groups, round=self.rounds, target=self.y))


def trial_rows(state: TrialState, semantic: SemanticContext, include_alters: bool = False) -> TrainingSet:
    X: List[np.ndarray] = []
    y: List[int] = []
    groups: List[str] = []
    rounds: List[int] = []
    for t in state.rounds_with_choices():
        if t < 2:
            continue
        # zero-idea egos stay in with target 0
        egos = [e for e in state.ego_ids if state.has_completed(e, t - 1) and state.has_completed(e, t)]
        if not egos:
            continue
        targets = marginal_distinct_series(
            state.round_pool(t, include_alters), {e: state.bins_of(e, t, (2,)) for e in egos}
        )
        for e in egos:
            X.append(assemble(state, semantic, e, t, state.choice(t, e)))
            y.append(targets[e])
            groups.append(f"{state.trial}/{state.condition}/{e}")
            rounds.append(t)
    if not X:
        return TrainingSet.empty()
    return TrainingSet(np.stack(X), np.asarray(y, dtype=np.float64), np.asarray(groups, dtype=object), np.asarray(rounds))


def build_dataset(
    states: Iterable[TrialState], semantic: SemanticContext, include_alters: bool = False, n_jobs: int = 1
) -> TrainingSet:
    """Replay every trial in arrival order; targets use the same pool code as the metric reports."""
    parts = Parallel(n_jobs=n_jobs)(delayed(trial_rows)(s, semantic, include_alters) for s in states)
    return TrainingSet.concat(parts)

