"""Train the alter-pair scoring model from finished trial logs"""

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from socialmuse import cli
from socialmuse.data.io import read_trial_logs
from socialmuse.data.run_dir import RunDirectory
from socialmuse.data.trial import TrialState, prepare_logs
from socialmuse.envs.universe import load_world
from socialmuse.model.dataset import build_dataset
from socialmuse.model.io import model_hash, save_model
from socialmuse.model.training import TrainingConfig, train_model
from socialmuse.utils.errors import InvalidConfig
from socialmuse.utils.safety import setup_safe_exit
from socialmuse.utils.tracking import create_logger


@dataclass
class Args:
    logs: Optional[str] = None
    """directory with participants/ideas/edges JSONL files (defaults to $SOCIALMUSE_DATA_DIR/logs)"""
    world: Optional[str] = None
    """directory with the taxonomy, lexicon and embedding tables (defaults to $SOCIALMUSE_DATA_DIR/world)"""
    out: str = "runs/train"
    """output run directory; the model lands in <out>/model"""
    seed: int = 0
    """seed of the split, the search and the boosting subsamples"""
    config: Optional[str] = None
    """JSON file with default values for these arguments"""
    training: TrainingConfig = field(default_factory=TrainingConfig)
    """training arguments"""
    exp_name: Optional[str] = None
    """the name of this experiment, used for the tensorboard run folder"""
    track: bool = False
    """if toggled, this run will be tracked with Weights and Biases"""
    wandb_project_name: str = "SocialMuse"
    """the wandb's project name"""
    wandb_entity: Optional[str] = None
    """the entity (team) of wandb's project"""


def resolve(path: Optional[str], default_part: str, what: str) -> Path:
    if path is not None:
        return Path(path)
    fallback = cli.data_dir(default_part)
    if fallback is None:
        raise InvalidConfig(f"no {what} given and ${cli.DATA_DIR_ENV} is not set")
    return fallback


def main(args: Args):
    args.training.seed = args.seed
    logs_dir = resolve(args.logs, "logs", "log directory")
    world_dir = resolve(args.world, "world", "world directory")
    semantic, _ = load_world(world_dir)
    logs = prepare_logs(read_trial_logs(logs_dir), semantic.taxonomy)
    states = [TrialState.from_log(log) for log in logs]
    print(f"loaded {len(states)} networks from {logs_dir}")

    run = RunDirectory(args.out)
    run.start("train", args, args.seed)
    run_name = args.exp_name or f"train__{args.seed}__{int(time.time())}"
    tracker = create_logger(str(run.root / "tensorboard" / run_name), run_name, args.training, args.track, args.wandb_project_name, args.wandb_entity)
    setup_safe_exit(manifest=run, tracker=tracker)

    dataset = build_dataset(states, semantic, args.training.include_alters_in_pool, args.training.n_jobs)
    print(f"dataset: {len(dataset)} rows from {len(set(dataset.groups))} egos")
    ensemble, report = train_model(dataset, args.training, tracker)
    write_model(run, ensemble, report)
    dataset.write_csv(run.model / "dataset.csv")
    tracker.close()
    run.mark("complete")
    print(f"test R2 {report.test_r2:.4f}  MAE {report.test_mae:.4f}  (ridge R2 {report.ridge_r2:.4f})")
    print(f"model hash {model_hash(run.model / 'model.json')}")
    return ensemble, report


def write_model(run: RunDirectory, ensemble, report) -> None:
    run.model.mkdir(parents=True, exist_ok=True)
    save_model(ensemble, run.model / "model.json")
    report.cv_table.to_csv(run.model / "cv_report.csv", index=False)
    if report.rfe_steps is not None:
        report.rfe_steps.to_csv(run.model / "rfe_report.csv", index=False)
    with open(run.model / "training_report.json", "w") as f:
        json.dump(report.summary(), f, indent=2, sort_keys=True)
        f.write("\n")


if __name__ == "__main__":
    args = cli.parse(Args)
    cli.run(main, args)
