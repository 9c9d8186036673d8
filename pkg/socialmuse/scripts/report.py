"""Summary tables (and optionally plots) from the metrics of a simulate run"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional

import pandas as pd

from socialmuse import cli
from socialmuse.data.run_dir import MANIFEST_FILE, RunDirectory, new_manifest, write_manifest
from socialmuse.envs.experiment import (
    COLLECTIVE_FILE,
    DOMINANCE_BY_SIZE_FILE,
    DOMINANCE_FILE,
    EGO_METRICS_FILE,
    GINI_BY_SIZE_FILE,
)
from socialmuse.recommender.engine import MAX_NETWORK_SIZE, MIN_NETWORK_SIZE

METRICS = ("marginal_distinct", "nonredundant", "cq", "best_novelty")


@dataclass
class Args:
    run_dir: str
    """run directory written by `simulate`"""
    out: Optional[str] = None
    """where to write the report (defaults to <run_dir>/reports)"""
    plots: bool = False
    """if toggled, also render the Gini and dominance series as PNG"""
    seed: int = 0
    """written to the report manifest; the report itself draws no random numbers"""
    config: Optional[str] = None
    """JSON file with default values for these arguments"""


def metric_comparison(ego_metrics: pd.DataFrame) -> pd.DataFrame:
    """Per metric and condition: mean, std and count over ego-rounds from round 2 on."""
    later = ego_metrics[ego_metrics["round"] >= 2]
    rows = []
    for metric in METRICS:
        stats = later.groupby("condition")[metric].agg(["mean", "std", "count"]).reset_index()
        stats.insert(0, "metric", metric)
        rows.append(stats)
    return pd.concat(rows, ignore_index=True)


def gini_vs_size(gini_by_size: pd.DataFrame) -> pd.DataFrame:
    later = gini_by_size[gini_by_size["round"] >= 2]
    return later.groupby(["condition", "network_size"])["gini"].agg(["mean", "std", "count"]).reset_index()


def plot_series(gini: pd.DataFrame, dominance: Optional[pd.DataFrame], out: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3.5))
    for condition, frame in gini.groupby("condition"):
        ax.plot(frame["network_size"], frame["mean"], marker="o", label=condition)
    ax.set_xlabel("network size")
    ax.set_ylabel("Gini coefficient")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out / "gini_vs_size.png", dpi=150)
    plt.close(fig)

    if dominance is not None and len(dominance):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.bar(dominance["network_size"], dominance["semantic_fraction"])
        ax.set_xlim(MIN_NETWORK_SIZE - 0.5, MAX_NETWORK_SIZE + 0.5)
        ax.set_ylim(0, 1)
        ax.set_xlabel("network size")
        ax.set_ylabel("semantic-dominated fraction")
        fig.tight_layout()
        fig.savefig(out / "dominance_by_size.png", dpi=150)
        plt.close(fig)


def main(args: Args) -> Dict:
    run = RunDirectory(args.run_dir)
    if not (run.metrics / EGO_METRICS_FILE).exists():
        raise FileNotFoundError(f"{run.metrics / EGO_METRICS_FILE} does not exist; is {run.root} a simulate run?")
    out = Path(args.out) if args.out is not None else run.reports
    out.mkdir(parents=True, exist_ok=True)

    ego_metrics = pd.read_csv(run.metrics / EGO_METRICS_FILE)
    comparison = metric_comparison(ego_metrics)
    comparison.to_csv(out / "metric_comparison.csv", index=False)
    gini = gini_vs_size(pd.read_csv(run.metrics / GINI_BY_SIZE_FILE))
    gini.to_csv(out / "gini_vs_size.csv", index=False)
    collective = pd.read_csv(run.metrics / COLLECTIVE_FILE)
    collective.groupby(["condition", "round"])["collective_distinct"].mean().reset_index().to_csv(
        out / "collective_by_round.csv", index=False
    )

    notes = []
    dominance = None
    if (run.metrics / DOMINANCE_BY_SIZE_FILE).exists():
        dominance = pd.read_csv(run.metrics / DOMINANCE_BY_SIZE_FILE)
        dominance.to_csv(out / "dominance_by_size.csv", index=False)
        pd.read_csv(run.metrics / DOMINANCE_FILE).to_csv(out / "dominance_profile.csv", index=False)
    else:
        notes.append("control-only run: no recommendations, so no dominance profile")

    if args.plots:
        plot_series(gini, dominance, out)

    summary = dict(
        conditions=sorted(ego_metrics["condition"].unique().tolist()),
        metrics={
            f"{row['metric']}/{row['condition']}": dict(mean=float(row["mean"]), std=float(row["std"]), count=int(row["count"]))
            for row in comparison.to_dict("records")
        },
        notes=notes,
    )
    with open(out / "summary.json", "w") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    write_manifest(out / MANIFEST_FILE, new_manifest("report", args, args.seed, "complete"))
    for note in notes:
        print(note)
    print(f"report written to {out}")
    return summary


if __name__ == "__main__":
    args = cli.parse(Args)
    cli.run(main, args)
