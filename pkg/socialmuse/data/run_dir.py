"""Run directory layout:

    config.json      the full resolved configuration of the command
    manifest.json    config hash, seed, code version, command and status
    world/           taxonomy, lexicon, embedding tables and prompts
    logs/            participants, ideas, edges, ratings and recommendations (JSONL)
    model/           model.json, cv_report.csv, rfe_report.csv, training_report.json
    metrics/         per-ego, Gini, collective and dominance CSVs
    reports/         tables and plots written by `report`
"""
import hashlib
import json
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Union

import socialmuse

CONFIG_FILE = "config.json"
MANIFEST_FILE = "manifest.json"


def config_hash(config) -> str:
    values = asdict(config) if is_dataclass(config) else config
    canonical = json.dumps(values, sort_keys=True, default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def new_manifest(command: str, config, seed: int, status: str) -> dict:
    return dict(
        command=command,
        seed=seed,
        version=socialmuse.__version__,
        config_hash=config_hash(config),
        status=status,
    )


def write_manifest(path: Union[str, Path], manifest: dict) -> None:
    with open(path, "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")


class RunDirectory:
    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)

    @property
    def world(self) -> Path:
        return self.root / "world"

    @property
    def logs(self) -> Path:
        return self.root / "logs"

    @property
    def model(self) -> Path:
        return self.root / "model"

    @property
    def metrics(self) -> Path:
        return self.root / "metrics"

    @property
    def reports(self) -> Path:
        return self.root / "reports"

    def start(self, command: str, config, seed: int) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        values = asdict(config) if is_dataclass(config) else config
        with open(self.root / CONFIG_FILE, "w") as f:
            json.dump(values, f, indent=2, sort_keys=True, default=str)
            f.write("\n")
        write_manifest(self.root / MANIFEST_FILE, new_manifest(command, values, seed, "running"))

    def manifest(self) -> dict:
        with open(self.root / MANIFEST_FILE, "r") as f:
            return json.load(f)

    def mark(self, status: str) -> None:
        manifest = self.manifest()
        manifest["status"] = status
        write_manifest(self.root / MANIFEST_FILE, manifest)

    def is_consistent(self) -> bool:
        """The stored config still hashes to the manifest's config hash."""
        with open(self.root / CONFIG_FILE, "r") as f:
            return config_hash(json.load(f)) == self.manifest()["config_hash"]
