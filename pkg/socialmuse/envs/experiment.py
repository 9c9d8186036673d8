"""Paired control/treatment trials and the tables the analysis reads.

Both conditions of a trial share the universe, the alters, the arrival order and every random
stream; only the availability of recommendations differs.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from socialmuse.data.io import write_trial_logs
from socialmuse.data.records import CONTROL, TREATMENT, TrialLog
from socialmuse.data.trial import TrialState
from socialmuse.envs.ideation_trial import TrialConfig, run_trial
from socialmuse.envs.universe import IdeaUniverse
from socialmuse.features.context import SemanticContext
from socialmuse.metrics.novelty import NoveltyScorer, ProxyNoveltyScorer, best_novelty_score
from socialmuse.metrics.rarity import collective_distinct_count, marginal_distinct_series, nonredundant_count
from socialmuse.model.dataset import TrainingSet, build_dataset
from socialmuse.model.gbt import TreeEnsemble
from socialmuse.network.bipartite import follower_counts, gini_by_network_size, gini_coefficient
from socialmuse.recommender.engine import dominance_by_size, dominance_profile

# bootstrap trials never share random streams with experiment trials
BOOTSTRAP_TRIAL_OFFSET = 10_000
LARGE_NETWORK_SIZE = 10

EGO_METRICS_FILE = "ego_metrics.csv"
GINI_FILE = "gini_by_round.csv"
GINI_BY_SIZE_FILE = "gini_by_size.csv"
COLLECTIVE_FILE = "collective_by_round.csv"
DOMINANCE_FILE = "dominance_profile.csv"
DOMINANCE_BY_SIZE_FILE = "dominance_by_size.csv"
TRIAL_SUMMARY_FILE = "trial_summary.csv"


def ego_metric_rows(
    state: TrialState, semantic: SemanticContext, scorer: NoveltyScorer, include_alters: bool = False
) -> List[Dict]:
    rows = []
    for t in state.rounds_with_ideas():
        egos = [e for e in state.ego_ids if state.has_completed(e, t)]
        marginal = marginal_distinct_series(state.round_pool(t, include_alters), {e: state.bins_of(e, t, (2,)) for e in egos})
        all_bins = {e: state.bins_of(e, t) for e in egos}
        for e in egos:
            rows.append(dict(
                trial=state.trial,
                condition=state.condition,
                ego=e,
                round=t,
                marginal_distinct=marginal[e],
                nonredundant=nonredundant_count(all_bins, e),
                cq=semantic.cq(state.concepts_of(e, t)),
                best_novelty=best_novelty_score(scorer, state.ideas_of(e, t)),
            ))
    return rows


def collective_rows(state: TrialState) -> List[Dict]:
    return [
        dict(
            trial=state.trial,
            condition=state.condition,
            round=t,
            collective_distinct=collective_distinct_count({e: state.bins_of(e, t) for e in state.ego_ids}),
        )
        for t in state.rounds_with_ideas()
    ]


def gini_rows(state: TrialState) -> Tuple[List[Dict], List[Dict]]:
    """Gini of the full network per round, and of the growing network per arrival."""
    by_round, by_size = [], []
    for t in state.rounds_with_choices():
        snapshot = state.round_snapshot(t)
        by_round.append(dict(trial=state.trial, condition=state.condition, round=t, gini=gini_coefficient(follower_counts(snapshot))))
        for size, g in gini_by_network_size(snapshot).items():
            by_size.append(dict(trial=state.trial, condition=state.condition, round=t, network_size=size, gini=g))
    return by_round, by_size


@dataclass
class ExperimentResult:
    logs: List[TrialLog]
    ego_metrics: pd.DataFrame
    gini: pd.DataFrame
    gini_by_size: pd.DataFrame
    collective: pd.DataFrame
    dominance: Optional[pd.DataFrame] = None
    dominance_by_size: Optional[pd.DataFrame] = None
    trial_summary: pd.DataFrame = field(default_factory=pd.DataFrame)

    def summary(self) -> Dict:
        s = self.trial_summary
        out = dict(n_trials=int(len(s)), conditions=sorted(self.ego_metrics["condition"].unique().tolist()) if len(self.ego_metrics) else [])
        if len(s) and "treatment_marginal" in s:
            out.update(
                marginal_wins=int((s["treatment_marginal"] > s["control_marginal"]).sum()),
                gini_wins=int((s["treatment_gini_large"] < s["control_gini_large"]).sum()),
                mean_control_marginal=float(s["control_marginal"].mean()),
                mean_treatment_marginal=float(s["treatment_marginal"].mean()),
                mean_control_gini_large=float(s["control_gini_large"].mean()),
                mean_treatment_gini_large=float(s["treatment_gini_large"].mean()),
            )
        return out


def _trial_task(config: TrialConfig, universe: IdeaUniverse, trial: int, ensemble: Optional[TreeEnsemble]):
    semantic = universe.semantic_context()
    scorer = ProxyNoveltyScorer(universe.tables["A"], universe.prompt_tokens())
    conditions = [CONTROL] + ([TREATMENT] if ensemble is not None else [])
    out = dict(logs=[], ego=[], gini=[], gini_size=[], collective=[])
    for condition in conditions:
        log, state = run_trial(config, universe, trial, condition, ensemble, semantic)
        out["logs"].append(log)
        out["ego"] += ego_metric_rows(state, semantic, scorer, config.include_alters_in_pool)
        by_round, by_size = gini_rows(state)
        out["gini"] += by_round
        out["gini_size"] += by_size
        out["collective"] += collective_rows(state)
    return out


def summarize_trials(ego_metrics: pd.DataFrame, gini_by_size: pd.DataFrame) -> pd.DataFrame:
    """Per trial: mean marginal distinct count from round 2 on, and mean Gini of networks larger than 10."""
    if ego_metrics.empty:
        return pd.DataFrame()
    later = ego_metrics[ego_metrics["round"] >= 2]
    marginal = later.groupby(["trial", "condition"])["marginal_distinct"].mean().unstack("condition")
    large = gini_by_size[(gini_by_size["round"] >= 2) & (gini_by_size["network_size"] > LARGE_NETWORK_SIZE)]
    gini = large.groupby(["trial", "condition"])["gini"].mean().unstack("condition")
    summary = pd.DataFrame(index=sorted(set(marginal.index) | set(gini.index)))
    summary.index.name = "trial"
    for condition in marginal.columns:
        summary[f"{condition}_marginal"] = marginal[condition]
    for condition in gini.columns:
        summary[f"{condition}_gini_large"] = gini[condition]
    for condition in ego_metrics["condition"].unique():
        for column in (f"{condition}_marginal", f"{condition}_gini_large"):
            if column not in summary:
                summary[column] = np.nan
    return summary.reset_index()


def run_experiment(
    config: TrialConfig,
    universe: IdeaUniverse,
    n_trials: int = 10,
    ensemble: Optional[TreeEnsemble] = None,
    n_jobs: int = 1,
) -> ExperimentResult:
    """Control-only when no model is given."""
    results = Parallel(n_jobs=n_jobs)(delayed(_trial_task)(config, universe, i, ensemble) for i in range(n_trials))
    logs = [log for r in results for log in r["logs"]]
    ego_metrics = pd.DataFrame(
        [row for r in results for row in r["ego"]],
        columns=["trial", "condition", "ego", "round", "marginal_distinct", "nonredundant", "cq", "best_novelty"],
    )
    gini = pd.DataFrame([row for r in results for row in r["gini"]], columns=["trial", "condition", "round", "gini"])
    gini_size = pd.DataFrame(
        [row for r in results for row in r["gini_size"]], columns=["trial", "condition", "round", "network_size", "gini"]
    )
    collective = pd.DataFrame(
        [row for r in results for row in r["collective"]], columns=["trial", "condition", "round", "collective_distinct"]
    )
    records = [rec for log in logs for rec in log.recommendations]
    return ExperimentResult(
        logs=logs,
        ego_metrics=ego_metrics,
        gini=gini,
        gini_by_size=gini_size,
        collective=collective,
        dominance=dominance_profile(records) if ensemble is not None else None,
        dominance_by_size=dominance_by_size(records) if ensemble is not None else None,
        trial_summary=summarize_trials(ego_metrics, gini_size),
    )


def write_results(result: ExperimentResult, logs_dir: Union[str, Path], metrics_dir: Union[str, Path]) -> None:
    write_trial_logs(logs_dir, result.logs)
    metrics_dir = Path(metrics_dir)
    metrics_dir.mkdir(parents=True, exist_ok=True)
    result.ego_metrics.to_csv(metrics_dir / EGO_METRICS_FILE, index=False)
    result.gini.to_csv(metrics_dir / GINI_FILE, index=False)
    result.gini_by_size.to_csv(metrics_dir / GINI_BY_SIZE_FILE, index=False)
    result.collective.to_csv(metrics_dir / COLLECTIVE_FILE, index=False)
    result.trial_summary.to_csv(metrics_dir / TRIAL_SUMMARY_FILE, index=False)
    if result.dominance is not None:
        result.dominance.to_csv(metrics_dir / DOMINANCE_FILE, index=False)
        result.dominance_by_size.to_csv(metrics_dir / DOMINANCE_BY_SIZE_FILE, index=False)


def _bootstrap_task(config: TrialConfig, universe: IdeaUniverse, trial: int) -> TrialState:
    return run_trial(config, universe, trial, CONTROL)[1]


def bootstrap_training(
    config: TrialConfig, universe: IdeaUniverse, n_seed_trials: int = 20, n_jobs: int = 1
) -> Tuple[TrainingSet, List[TrialState]]:
    """Control-only trials replayed into a training set, standing in for prior experiments."""
    states = Parallel(n_jobs=n_jobs)(
        delayed(_bootstrap_task)(config, universe, BOOTSTRAP_TRIAL_OFFSET + i) for i in range(n_seed_trials)
    )
    dataset = build_dataset(states, universe.semantic_context(), config.include_alters_in_pool, n_jobs)
    return dataset, states
