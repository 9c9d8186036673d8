"""Reproduce the whole desk-scale study in one command: generate a world, bootstrap a training set
from control-only trials, train the model and run paired control/treatment trials"""

import json
import time
from dataclasses import dataclass, field
from typing import Optional

from socialmuse import cli
from socialmuse.data.io import write_trial_logs
from socialmuse.data.run_dir import RunDirectory
from socialmuse.envs.experiment import bootstrap_training, run_experiment, write_results
from socialmuse.envs.ideation_trial import TrialConfig
from socialmuse.envs.universe import IdeaUniverse, write_world
from socialmuse.model.io import load_model
from socialmuse.model.training import TrainingConfig, train_model
from socialmuse.scripts.train import write_model
from socialmuse.utils.logging_utils import logger
from socialmuse.utils.safety import setup_safe_exit
from socialmuse.utils.tracking import create_logger


@dataclass
class Args:
    trials: int = 10
    """number of paired control/treatment trials"""
    rounds: Optional[int] = None
    """overrides trial.rounds when given"""
    bootstrap_trials: int = 20
    """control-only trials used to build the training set"""
    model: Optional[str] = None
    """use this model file instead of bootstrapping and training one"""
    control_only: bool = False
    """if toggled, skip training and run only the control condition"""
    out: str = "runs/simulate"
    """output run directory"""
    seed: int = 0
    """seed of the world, the agents and the training"""
    config: Optional[str] = None
    """JSON file with default values for these arguments"""
    n_jobs: int = 1
    """parallel workers for trials and cross-validation"""
    trial: TrialConfig = field(default_factory=TrialConfig)
    """trial, universe and agent arguments"""
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


def main(args: Args):
    args.trial.seed = args.seed
    args.training.seed = args.seed
    args.training.n_jobs = args.n_jobs
    args.training.include_alters_in_pool = args.trial.include_alters_in_pool
    if args.rounds is not None:
        args.trial.rounds = args.rounds
    args.trial.validate()

    run = RunDirectory(args.out)
    run.start("simulate", args, args.seed)
    run_name = args.exp_name or f"simulate__{args.seed}__{int(time.time())}"
    tracker = create_logger(str(run.root / "tensorboard" / run_name), run_name, args.training, args.track, args.wandb_project_name, args.wandb_entity)
    setup_safe_exit(manifest=run, tracker=tracker)

    universe = IdeaUniverse.generate(args.trial.universe, args.seed)
    write_world(universe, run.world)

    ensemble = None
    if args.model is not None:
        ensemble = load_model(args.model)
    elif not args.control_only:
        print(f"bootstrapping a training set from {args.bootstrap_trials} control trials")
        dataset, states = bootstrap_training(args.trial, universe, args.bootstrap_trials, args.n_jobs)
        write_trial_logs(run.root / "bootstrap_logs", [s.to_log() for s in states])
        if len(dataset) == 0 or len(set(dataset.groups)) < 2:
            logger.warning("the bootstrap trials produced no training rows, running the control condition only")
        else:
            ensemble, report = train_model(dataset, args.training, tracker)
            write_model(run, ensemble, report)
            dataset.write_csv(run.model / "dataset.csv")
            print(f"model: test R2 {report.test_r2:.4f}  MAE {report.test_mae:.4f}  (ridge R2 {report.ridge_r2:.4f})")

    print(f"running {args.trials} trials ({'control and treatment' if ensemble is not None else 'control only'})")
    result = run_experiment(args.trial, universe, args.trials, ensemble, args.n_jobs)
    write_results(result, run.logs, run.metrics)
    summary = result.summary()
    with open(run.metrics / "summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    tracker.close()
    run.mark("complete")
    if "marginal_wins" in summary:
        print(
            f"treatment beat control on marginal distinct count in {summary['marginal_wins']}/{summary['n_trials']} trials, "
            f"on Gini of large networks in {summary['gini_wins']}/{summary['n_trials']}"
        )
    return result


if __name__ == "__main__":
    args = cli.parse(Args)
    cli.run(main, args)
