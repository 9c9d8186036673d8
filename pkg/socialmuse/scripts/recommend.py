"""Batch-score every pending (ego, round) of a trial snapshot and write the recommendation log"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from tqdm import tqdm

from socialmuse import cli
from socialmuse.data.io import read_trial_logs
from socialmuse.data.run_dir import new_manifest, write_manifest
from socialmuse.data.trial import TrialState, prepare_logs
from socialmuse.envs.universe import load_world
from socialmuse.model.io import load_model
from socialmuse.recommender.engine import Recommendation, pending_egos, recommend, write_recommendations
from socialmuse.scripts.train import resolve


@dataclass
class Args:
    snapshot: Optional[str] = None
    """directory with the JSONL files of the running trials (defaults to $SOCIALMUSE_DATA_DIR/logs)"""
    world: Optional[str] = None
    """directory with the taxonomy, lexicon and embedding tables (defaults to $SOCIALMUSE_DATA_DIR/world)"""
    model: Optional[str] = None
    """model file written by `train` (defaults to $SOCIALMUSE_DATA_DIR/model/model.json)"""
    round: Optional[int] = None
    """only score choices for this round; by default every round with pending egos"""
    out: str = "recommendations.jsonl"
    """recommendation log to write"""
    seed: int = 0
    """written to the manifest next to the log; the scorer itself draws no random numbers"""
    config: Optional[str] = None
    """JSON file with default values for these arguments"""


def manifest_path(out: str) -> Path:
    return Path(f"{out}.manifest.json")


def main(args: Args) -> List[Recommendation]:
    snapshot = resolve(args.snapshot, "logs", "snapshot directory")
    world_dir = resolve(args.world, "world", "world directory")
    model_path = resolve(args.model, "model/model.json", "model file")
    if not model_path.exists():
        raise FileNotFoundError(f"model file {model_path} does not exist")
    ensemble = load_model(model_path)
    semantic, _ = load_world(world_dir)
    states = [TrialState.from_log(log) for log in prepare_logs(read_trial_logs(snapshot), semantic.taxonomy)]

    jobs = []
    for state in states:
        rounds = [args.round] if args.round is not None else range(2, max(state.rounds_with_ideas(), default=0) + 2)
        for t in rounds:
            jobs.extend((state, ego, t) for ego in pending_egos(state, t))
    recommendations = [recommend(state, semantic, ego, t, ensemble) for state, ego, t in tqdm(jobs, disable=not jobs)]

    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_recommendations(args.out, recommendations)
    manifest = new_manifest("recommend", args, args.seed, "complete")
    manifest["n_recommendations"] = len(recommendations)
    write_manifest(manifest_path(args.out), manifest)
    print(f"wrote {len(recommendations)} recommendations to {args.out}")
    return recommendations


if __name__ == "__main__":
    args = cli.parse(Args)
    cli.run(main, args)
